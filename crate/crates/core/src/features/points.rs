use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::PixelPoint;
use crate::img::GrayImage;

use super::{FeatureError, Match, PointFeature};

/// 256-bit intensity-comparison descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointDescriptor(pub [u64; 4]);

impl PointDescriptor {
    pub fn hamming(&self, other: &PointDescriptor) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PyramidParams {
    pub levels: usize,
    pub scale: f64,
    /// Minimum corner response (min-eigenvalue of the structure tensor).
    pub threshold: f64,
}

impl Default for PyramidParams {
    fn default() -> Self {
        Self {
            levels: 4,
            scale: 1.25,
            threshold: 2e-4,
        }
    }
}

const PATCH_RADIUS: i64 = 13;
const PATTERN_SEED: u64 = 0x5EED_0B5E;

fn sampling_pattern() -> Vec<(i8, i8, i8, i8)> {
    let mut rng = ChaCha8Rng::seed_from_u64(PATTERN_SEED);
    let r = PATCH_RADIUS as f64 - 1.0;
    (0..256)
        .map(|_| {
            let mut pick = || {
                let x = (rng.random::<f64>() * 2.0 - 1.0) * r;
                let y = (rng.random::<f64>() * 2.0 - 1.0) * r;
                (x.round() as i8, y.round() as i8)
            };
            let (ax, ay) = pick();
            let (bx, by) = pick();
            (ax, ay, bx, by)
        })
        .collect()
}

fn downscale(img: &GrayImage, scale: f64) -> GrayImage {
    let w = ((img.width as f64 / scale).round() as usize).max(1);
    let h = ((img.height as f64 / scale).round() as usize).max(1);
    GrayImage::from_fn(w, h, |x, y| {
        img.sample(x as f64 * scale, y as f64 * scale)
    })
}

fn box_blur(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width, img.height);
    GrayImage::from_fn(w, h, |x, y| {
        let mut sum = 0.0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let xi = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                let yi = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                sum += img.at(xi, yi);
            }
        }
        sum / 9.0
    })
}

pub(crate) fn gradients(img: &GrayImage) -> (GrayImage, GrayImage) {
    let (w, h) = (img.width, img.height);
    let gx = GrayImage::from_fn(w, h, |x, y| {
        if x == 0 || x + 1 >= w || y == 0 || y + 1 >= h {
            return 0.0;
        }
        (img.at(x + 1, y - 1) + 2.0 * img.at(x + 1, y) + img.at(x + 1, y + 1)
            - img.at(x - 1, y - 1)
            - 2.0 * img.at(x - 1, y)
            - img.at(x - 1, y + 1))
            / 8.0
    });
    let gy = GrayImage::from_fn(w, h, |x, y| {
        if x == 0 || x + 1 >= w || y == 0 || y + 1 >= h {
            return 0.0;
        }
        (img.at(x - 1, y + 1) + 2.0 * img.at(x, y + 1) + img.at(x + 1, y + 1)
            - img.at(x - 1, y - 1)
            - 2.0 * img.at(x, y - 1)
            - img.at(x + 1, y - 1))
            / 8.0
    });
    (gx, gy)
}

/// Min-eigenvalue corner response over a 3x3 window.
fn corner_response(gx: &GrayImage, gy: &GrayImage) -> GrayImage {
    let (w, h) = (gx.width, gx.height);
    GrayImage::from_fn(w, h, |x, y| {
        if x < 2 || y < 2 || x + 2 >= w || y + 2 >= h {
            return 0.0;
        }
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let xi = (x as i64 + dx) as usize;
                let yi = (y as i64 + dy) as usize;
                let (a, b) = (gx.at(xi, yi), gy.at(xi, yi));
                sxx += a * a;
                syy += b * b;
                sxy += a * b;
            }
        }
        let tr = sxx + syy;
        let det_part = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
        0.5 * (tr - det_part)
    })
}

/// Detects up to `max_points` corner features across an image pyramid.
/// Deterministic for a fixed image.
pub fn detect_points(
    image: &GrayImage,
    max_points: usize,
    params: &PyramidParams,
) -> Result<Vec<PointFeature>, FeatureError> {
    if image.is_empty() || image.width < 32 || image.height < 32 {
        return Err(FeatureError::EmptyImage);
    }
    assert!(max_points > 0);
    let pattern = sampling_pattern();

    // Budget per level decays with the sampling density.
    let weights: Vec<f64> = (0..params.levels)
        .map(|l| 1.0 / params.scale.powi(l as i32))
        .collect();
    let wsum: f64 = weights.iter().sum();

    let mut out = Vec::new();
    let mut level_img = image.clone();
    let mut level_scale = 1.0;
    for level in 0..params.levels {
        if level > 0 {
            level_img = downscale(&level_img, params.scale);
            level_scale *= params.scale;
            if level_img.width < 32 || level_img.height < 32 {
                break;
            }
        }
        let budget =
            ((max_points as f64) * weights[level] / wsum).ceil() as usize;
        let (gx, gy) = gradients(&level_img);
        let resp = corner_response(&gx, &gy);
        let blurred = box_blur(&level_img);

        // Non-maximum suppression over 5x5.
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        let (w, h) = (resp.width, resp.height);
        let margin = PATCH_RADIUS as usize + 1;
        for y in margin..h.saturating_sub(margin) {
            for x in margin..w.saturating_sub(margin) {
                let v = resp.at(x, y);
                if v < params.threshold {
                    continue;
                }
                let mut is_max = true;
                'nms: for dy in -2i64..=2 {
                    for dx in -2i64..=2 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let n = resp.at((x as i64 + dx) as usize, (y as i64 + dy) as usize);
                        if n > v || (n == v && (dy < 0 || (dy == 0 && dx < 0))) {
                            is_max = false;
                            break 'nms;
                        }
                    }
                }
                if is_max {
                    cands.push((v, x, y));
                }
            }
        }
        cands.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        cands.truncate(budget);

        for (_, x, y) in cands {
            let mut bits = [0u64; 4];
            for (i, (ax, ay, bx, by)) in pattern.iter().enumerate() {
                let a = blurred.at(
                    (x as i64 + *ax as i64) as usize,
                    (y as i64 + *ay as i64) as usize,
                );
                let b = blurred.at(
                    (x as i64 + *bx as i64) as usize,
                    (y as i64 + *by as i64) as usize,
                );
                if a < b {
                    bits[i / 64] |= 1u64 << (i % 64);
                }
            }
            out.push(PointFeature {
                px: PixelPoint::new(x as f64 * level_scale, y as f64 * level_scale),
                pyramid_level: level,
                descriptor: PointDescriptor(bits),
                sigma2: level_scale * level_scale,
            });
        }
    }
    Ok(out)
}

/// Mutual-best Hamming matching between two point feature sets.
pub fn match_points(a: &[PointFeature], b: &[PointFeature], max_hamming: u32) -> Vec<Match> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let best_for = |from: &[PointFeature], to: &[PointFeature]| -> Vec<Option<(usize, u32)>> {
        from.iter()
            .map(|f| {
                let mut best: Option<(usize, u32)> = None;
                for (j, g) in to.iter().enumerate() {
                    let d = f.descriptor.hamming(&g.descriptor);
                    if best.map_or(true, |(_, bd)| d < bd) {
                        best = Some((j, d));
                    }
                }
                best
            })
            .collect()
    };
    let ab = best_for(a, b);
    let ba = best_for(b, a);
    let mut out = Vec::new();
    for (i, m) in ab.iter().enumerate() {
        if let Some((j, d)) = m {
            if *d <= max_hamming && ba[*j] == Some((i, *d)) {
                out.push(Match {
                    index_a: i,
                    index_b: *j,
                    hamming_distance: *d,
                });
            }
        }
    }
    out
}
