use crate::geom::PixelPoint;
use crate::img::GrayImage;

use super::band::compute_band_descriptor;
use super::points::gradients;
use super::{FeatureError, LineSegment2D};

#[derive(Debug, Clone, Copy)]
pub struct SegmentDetectParams {
    /// Gradient magnitude needed to seed a chain.
    pub anchor_threshold: f64,
    /// Gradient magnitude needed to continue a chain.
    pub edge_threshold: f64,
    /// Minimum chain pixels for a segment at its own level.
    pub min_pixels: usize,
    /// Maximum point-to-line deviation before the chain is split.
    pub fit_tolerance: f64,
    pub pyramid_scale: f64,
}

impl Default for SegmentDetectParams {
    fn default() -> Self {
        Self {
            anchor_threshold: 0.03,
            edge_threshold: 0.006,
            min_pixels: 12,
            fit_tolerance: 1.0,
            pyramid_scale: 1.4,
        }
    }
}

/// Incremental orthogonal line fit over chain pixels.
#[derive(Debug, Clone, Copy, Default)]
struct LineFit {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl LineFit {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
    }

    /// Centroid and unit direction of the total-least-squares line.
    fn line(&self) -> ((f64, f64), (f64, f64)) {
        let cx = self.sx / self.n;
        let cy = self.sy / self.n;
        let vxx = self.sxx / self.n - cx * cx;
        let vyy = self.syy / self.n - cy * cy;
        let vxy = self.sxy / self.n - cx * cy;
        // Principal eigenvector of the 2x2 covariance.
        let theta = 0.5 * (2.0 * vxy).atan2(vxx - vyy);
        ((cx, cy), (theta.cos(), theta.sin()))
    }

    fn distance(&self, x: f64, y: f64) -> f64 {
        let ((cx, cy), (dx, dy)) = self.line();
        ((x - cx) * dy - (y - cy) * dx).abs()
    }
}

fn smooth(img: &GrayImage) -> GrayImage {
    // Separable binomial 1-4-6-4-1 approximation of a Gaussian.
    let k = [1.0, 4.0, 6.0, 4.0, 1.0];
    let (w, h) = (img.width, img.height);
    let horiz = GrayImage::from_fn(w, h, |x, y| {
        let mut s = 0.0;
        for (i, kv) in k.iter().enumerate() {
            let xi = (x as i64 + i as i64 - 2).clamp(0, w as i64 - 1) as usize;
            s += kv * img.at(xi, y);
        }
        s / 16.0
    });
    GrayImage::from_fn(w, h, |x, y| {
        let mut s = 0.0;
        for (i, kv) in k.iter().enumerate() {
            let yi = (y as i64 + i as i64 - 2).clamp(0, h as i64 - 1) as usize;
            s += kv * horiz.at(x, yi);
        }
        s / 16.0
    })
}

struct EdgeMaps {
    mag: Vec<f64>,
    ex: Vec<f64>, // unit edge direction (perpendicular to the gradient)
    ey: Vec<f64>,
    horizontal: Vec<bool>, // gradient mostly horizontal -> edge runs vertically
    w: usize,
    h: usize,
}

impl EdgeMaps {
    fn at(&self, x: i64, y: i64) -> f64 {
        if x < 1 || y < 1 || x >= self.w as i64 - 1 || y >= self.h as i64 - 1 {
            0.0
        } else {
            self.mag[y as usize * self.w + x as usize]
        }
    }
}

fn edge_maps(img: &GrayImage) -> (EdgeMaps, GrayImage, GrayImage) {
    let (gx, gy) = gradients(img);
    let (w, h) = (img.width, img.height);
    let mut mag = vec![0.0; w * h];
    let mut ex = vec![0.0; w * h];
    let mut ey = vec![0.0; w * h];
    let mut horizontal = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let (a, b) = (gx.at(x, y), gy.at(x, y));
            let m = (a * a + b * b).sqrt();
            mag[y * w + x] = m;
            if m > 1e-12 {
                ex[y * w + x] = -b / m;
                ey[y * w + x] = a / m;
            }
            horizontal[y * w + x] = a.abs() >= b.abs();
        }
    }
    (
        EdgeMaps {
            mag,
            ex,
            ey,
            horizontal,
            w,
            h,
        },
        gx,
        gy,
    )
}

const STEPS8: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Walks from an anchor along the local edge direction (the gradient
/// perpendicular, sign-aligned with the walk so diagonals track correctly),
/// picking the strongest of the three neighbors nearest that direction.
/// Marks pixels visited globally.
fn route(
    maps: &EdgeMaps,
    visited: &mut [bool],
    start: (i64, i64),
    initial_dir: (f64, f64),
    edge_threshold: f64,
) -> Vec<(i64, i64)> {
    let mut chain = Vec::new();
    let (mut x, mut y) = start;
    let (mut dx, mut dy) = initial_dir;
    loop {
        let idx = (y * maps.w as i64 + x) as usize;
        if visited[idx] {
            break;
        }
        visited[idx] = true;
        chain.push((x, y));

        // Local edge direction, kept consistent with the walk.
        let (mut eu, mut ev) = (maps.ex[idx], maps.ey[idx]);
        if eu * dx + ev * dy < 0.0 {
            eu = -eu;
            ev = -ev;
        }
        if eu == 0.0 && ev == 0.0 {
            eu = dx;
            ev = dy;
        }

        // The three 8-neighbor steps best aligned with the edge direction.
        let mut ranked: Vec<(f64, (i64, i64))> = STEPS8
            .iter()
            .map(|&(sx, sy)| {
                let n = ((sx * sx + sy * sy) as f64).sqrt();
                let align = (sx as f64 * eu + sy as f64 * ev) / n;
                (align, (sx, sy))
            })
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

        let mut best: Option<(f64, i64, i64)> = None;
        for &(align, (sx, sy)) in ranked.iter().take(3) {
            if align <= 0.0 {
                continue;
            }
            let (cx, cy) = (x + sx, y + sy);
            let m = maps.at(cx, cy);
            if m >= edge_threshold && !visited[(cy * maps.w as i64 + cx) as usize] {
                if best.map_or(true, |(bm, _, _)| m > bm) {
                    best = Some((m, cx, cy));
                }
            }
        }
        match best {
            Some((_, nx, ny)) => {
                let n = (((nx - x).pow(2) + (ny - y).pow(2)) as f64).sqrt();
                dx = (nx - x) as f64 / n;
                dy = (ny - y) as f64 / n;
                x = nx;
                y = ny;
            }
            None => break,
        }
    }
    chain
}

/// Splits a pixel chain into straight segments by incremental fitting.
fn chain_to_segments(
    chain: &[(i64, i64)],
    params: &SegmentDetectParams,
    out: &mut Vec<(PixelPoint, PixelPoint)>,
) {
    let mut i = 0;
    while i + params.min_pixels <= chain.len() {
        let mut fit = LineFit::default();
        let start = i;
        // Seed with the minimum pixel count.
        for &(x, y) in &chain[start..start + params.min_pixels] {
            fit.push(x as f64, y as f64);
        }
        let mut end = start + params.min_pixels;
        // Seed must already be straight.
        let seed_ok = chain[start..end]
            .iter()
            .all(|&(x, y)| fit.distance(x as f64, y as f64) <= params.fit_tolerance);
        if !seed_ok {
            i += 1;
            continue;
        }
        while end < chain.len() {
            let (x, y) = (chain[end].0 as f64, chain[end].1 as f64);
            if fit.distance(x, y) > params.fit_tolerance {
                break;
            }
            fit.push(x, y);
            end += 1;
        }
        let ((cx, cy), (dx, dy)) = fit.line();
        let proj = |p: (i64, i64)| {
            let t = (p.0 as f64 - cx) * dx + (p.1 as f64 - cy) * dy;
            PixelPoint::new(cx + t * dx, cy + t * dy)
        };
        out.push((proj(chain[start]), proj(chain[end - 1])));
        i = end;
    }
}

/// Edge-drawing segment detection over an image pyramid. Endpoints are
/// reported in level-0 coordinates; descriptors are computed at the
/// segment's own level.
pub fn detect_segments(
    image: &GrayImage,
    pyramid_levels: usize,
    params: &SegmentDetectParams,
) -> Result<Vec<LineSegment2D>, FeatureError> {
    if image.width < 16 || image.height < 16 {
        return Err(FeatureError::EmptyImage);
    }
    let mut out = Vec::new();
    let mut level_img = image.clone();
    let mut level_scale = 1.0;
    for level in 0..pyramid_levels.max(1) {
        if level > 0 {
            let s = params.pyramid_scale;
            let w = ((level_img.width as f64 / s).round() as usize).max(1);
            let h = ((level_img.height as f64 / s).round() as usize).max(1);
            level_img = GrayImage::from_fn(w, h, |x, y| {
                level_img.sample(x as f64 * s, y as f64 * s)
            });
            level_scale *= s;
            if level_img.width < 16 || level_img.height < 16 {
                break;
            }
        }
        let smoothed = smooth(&level_img);
        let (maps, gx, gy) = edge_maps(&smoothed);
        let (w, h) = (maps.w, maps.h);

        // Anchors: local maxima across the gradient direction.
        let mut anchors: Vec<(f64, i64, i64)> = Vec::new();
        for y in 2..h as i64 - 2 {
            for x in 2..w as i64 - 2 {
                let m = maps.at(x, y);
                if m < params.anchor_threshold {
                    continue;
                }
                let idx = (y * w as i64 + x) as usize;
                let (n1, n2) = if maps.horizontal[idx] {
                    (maps.at(x - 1, y), maps.at(x + 1, y))
                } else {
                    (maps.at(x, y - 1), maps.at(x, y + 1))
                };
                // One anchor per gradient plateau: strict on one side only.
                if m > n1 && m >= n2 {
                    anchors.push((m, x, y));
                }
            }
        }
        anchors.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });

        let mut visited = vec![false; w * h];
        let mut endpoints: Vec<(PixelPoint, PixelPoint)> = Vec::new();
        for &(_, x, y) in &anchors {
            let idx = (y * w as i64 + x) as usize;
            if visited[idx] {
                continue;
            }
            let e0 = (maps.ex[idx], maps.ey[idx]);
            let fwd = route(&maps, &mut visited, (x, y), e0, params.edge_threshold);
            // Walk the other way; the anchor is already visited, so clear it
            // temporarily for the reverse pass.
            visited[idx] = false;
            let bwd = route(
                &maps,
                &mut visited,
                (x, y),
                (-e0.0, -e0.1),
                params.edge_threshold,
            );
            let mut chain: Vec<(i64, i64)> = bwd.into_iter().rev().collect();
            chain.pop(); // the anchor appears in both walks
            chain.extend(fwd);
            if chain.len() >= params.min_pixels {
                chain_to_segments(&chain, params, &mut endpoints);
            }
        }

        for (p, q) in endpoints {
            let descriptor = compute_band_descriptor(&gx, &gy, &p, &q);
            let p0 = PixelPoint::new(p.u * level_scale, p.v * level_scale);
            let q0 = PixelPoint::new(q.u * level_scale, q.v * level_scale);
            let seg = LineSegment2D::new(p0, q0, level, descriptor);
            if seg.length() > 1e-9 {
                out.push(seg);
            }
        }
    }
    Ok(out)
}
