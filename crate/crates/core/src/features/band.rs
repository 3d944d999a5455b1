use crate::geom::PixelPoint;
use crate::img::GrayImage;

use super::{LineSegment2D, Match};

pub const SEGMENT_DESCRIPTOR_BITS: u32 = 64;

const BANDS: usize = 5;
const BAND_SPACING: f64 = 2.0;
const MAX_SAMPLES: usize = 48;

/// Simplified band descriptor: gradient statistics in five bands parallel
/// to the segment, binarized into a 64-bit code.
///
/// Per band the mean and standard deviation of the gradient components
/// along and across the segment give 4 statistics; bits come from ordered
/// band-pair comparisons (40), comparisons against the per-statistic median
/// band (20) and the four statistic-mean signs.
pub fn compute_band_descriptor(
    gx: &GrayImage,
    gy: &GrayImage,
    p: &PixelPoint,
    q: &PixelPoint,
) -> u64 {
    let len = p.distance(q);
    let (du, dv) = ((q.u - p.u) / len, (q.v - p.v) / len);
    let (nu, nv) = (-dv, du);
    let samples = (len.round() as usize).clamp(4, MAX_SAMPLES);

    let mut stats = [[0.0f64; 4]; BANDS]; // [band][mean_par, std_par, mean_perp, std_perp]
    for (bi, stat) in stats.iter_mut().enumerate() {
        let off = (bi as f64 - (BANDS as f64 - 1.0) / 2.0) * BAND_SPACING;
        let (mut sp, mut sp2, mut sq, mut sq2) = (0.0, 0.0, 0.0, 0.0);
        for s in 0..samples {
            let t = len * (s as f64 + 0.5) / samples as f64;
            let u = p.u + t * du + off * nu;
            let v = p.v + t * dv + off * nv;
            let (a, b) = (gx.sample(u, v), gy.sample(u, v));
            let par = a * du + b * dv;
            let perp = a * nu + b * nv;
            sp += par;
            sp2 += par * par;
            sq += perp;
            sq2 += perp * perp;
        }
        let n = samples as f64;
        let mp = sp / n;
        let mq = sq / n;
        stat[0] = mp;
        stat[1] = (sp2 / n - mp * mp).max(0.0).sqrt();
        stat[2] = mq;
        stat[3] = (sq2 / n - mq * mq).max(0.0).sqrt();
    }

    let mut code = 0u64;
    let mut bit = 0;
    let mut push = |cond: bool| {
        if cond {
            code |= 1u64 << bit;
        }
        bit += 1;
    };
    for s in 0..4 {
        for i in 0..BANDS {
            for j in (i + 1)..BANDS {
                push(stats[i][s] > stats[j][s]);
            }
        }
    }
    for s in 0..4 {
        let mut vals: Vec<f64> = (0..BANDS).map(|b| stats[b][s]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = vals[BANDS / 2];
        for b in 0..BANDS {
            push(stats[b][s] > median);
        }
    }
    for s in 0..4 {
        let mean: f64 = (0..BANDS).map(|b| stats[b][s]).sum::<f64>() / BANDS as f64;
        push(mean > 0.0);
    }
    debug_assert_eq!(bit, 64);
    code
}

/// Mutual-best segment matching by descriptor Hamming distance. The result
/// is injective in both directions.
pub fn match_segments(a: &[LineSegment2D], b: &[LineSegment2D], max_hamming: u32) -> Vec<Match> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let best = |from: &[LineSegment2D], to: &[LineSegment2D]| -> Vec<Option<(usize, u32)>> {
        from.iter()
            .map(|s| {
                let mut best: Option<(usize, u32)> = None;
                for (j, t) in to.iter().enumerate() {
                    let d = (s.descriptor ^ t.descriptor).count_ones();
                    if best.map_or(true, |(_, bd)| d < bd) {
                        best = Some((j, d));
                    }
                }
                best
            })
            .collect()
    };
    let ab = best(a, b);
    let ba = best(b, a);
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

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn textured_image() -> (GrayImage, GrayImage) {
        let img = GrayImage::from_fn(160, 120, |x, y| {
            let fx = x as f64 * 0.13;
            let fy = y as f64 * 0.1;
            0.5 + 0.3 * (fx.sin() * fy.cos()) + if y > 60 { 0.2 } else { 0.0 }
        });
        super::super::points::gradients(&img)
    }

    fn seg(p: (f64, f64), q: (f64, f64), d: u64) -> LineSegment2D {
        LineSegment2D::new(PixelPoint::new(p.0, p.1), PixelPoint::new(q.0, q.1), 0, d)
    }

    #[test]
    fn identical_sets_match_with_zero_distance() {
        let (gx, gy) = textured_image();
        let mut segs = Vec::new();
        for i in 0..6 {
            let p = PixelPoint::new(20.0 + 10.0 * i as f64, 30.0 + 5.0 * i as f64);
            let q = PixelPoint::new(60.0 + 10.0 * i as f64, 50.0 + 4.0 * i as f64);
            let d = compute_band_descriptor(&gx, &gy, &p, &q);
            segs.push(LineSegment2D::new(p, q, 0, d));
        }
        let matches = match_segments(&segs, &segs, 16);
        assert_eq!(matches.len(), segs.len());
        assert!(matches.iter().all(|m| m.index_a == m.index_b && m.hamming_distance == 0));
    }

    #[test]
    fn distant_descriptors_do_not_match() {
        let a = vec![seg((0.0, 0.0), (10.0, 0.0), 0x0)];
        let b = vec![seg((0.0, 0.0), (10.0, 0.0), !0u64)];
        assert!(match_segments(&a, &b, 16).is_empty());
    }

    #[test]
    fn shifted_set_keeps_cardinality() {
        // Oracle: exhaustive pairwise Hamming scan on band descriptors of
        // one-pixel-shifted segments.
        let (gx, gy) = textured_image();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..5 {
            let p = PixelPoint::new(25.0 + 12.0 * i as f64, 32.0 + 6.0 * i as f64);
            let q = PixelPoint::new(70.0 + 9.0 * i as f64, 55.0 + 3.0 * i as f64);
            let da = compute_band_descriptor(&gx, &gy, &p, &q);
            a.push(LineSegment2D::new(p, q, 0, da));
            let ps = PixelPoint::new(p.u + 1.0, p.v);
            let qs = PixelPoint::new(q.u + 1.0, q.v);
            let db = compute_band_descriptor(&gx, &gy, &ps, &qs);
            b.push(LineSegment2D::new(ps, qs, 0, db));
        }
        let identity = match_segments(&a, &a, 16);
        let shifted = match_segments(&a, &b, 16);
        assert_eq!(identity.len(), shifted.len());
        // Exhaustive oracle: for each a, the best b by scan equals the match.
        for m in &shifted {
            let mut best = (usize::MAX, u32::MAX);
            for (j, t) in b.iter().enumerate() {
                let d = (a[m.index_a].descriptor ^ t.descriptor).count_ones();
                if d < best.1 {
                    best = (j, d);
                }
            }
            assert_eq!(best.0, m.index_b);
            assert_eq!(best.1, m.hamming_distance);
        }
    }

    #[test]
    fn mutual_best_is_injective() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mk = |rng: &mut ChaCha8Rng| {
            (0..40)
                .map(|i| {
                    seg(
                        (i as f64, 0.0),
                        (i as f64 + 10.0, 5.0),
                        rng.random::<u64>(),
                    )
                })
                .collect::<Vec<_>>()
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        let matches = match_segments(&a, &b, 32);
        let mut seen_a = std::collections::HashSet::new();
        let mut seen_b = std::collections::HashSet::new();
        for m in &matches {
            assert!(seen_a.insert(m.index_a));
            assert!(seen_b.insert(m.index_b));
            assert!(m.hamming_distance <= SEGMENT_DESCRIPTOR_BITS);
        }
    }
}
