use crate::geom::PixelPoint;

use super::LineSegment2D;

/// Thresholds for the three fusion rules.
#[derive(Debug, Clone, Copy)]
pub struct FusionParams {
    /// Rule 1: maximum direction difference, degrees (lines are axial).
    pub angle_tol_deg: f64,
    /// Rule 2: maximum nearest-endpoint distance, pixels.
    pub endpoint_gap: f64,
    /// Rule 3: maximum endpoint-to-line perpendicular distance, pixels.
    pub perp_tol: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            angle_tol_deg: 1.0,
            endpoint_gap: 10.0,
            perp_tol: 2.0,
        }
    }
}

fn axial_angle_between(a: &LineSegment2D, b: &LineSegment2D) -> f64 {
    let (au, av) = a.direction();
    let (bu, bv) = b.direction();
    (au * bu + av * bv).abs().min(1.0).acos()
}

/// Rule 2's overlap test: project both segments onto the mean direction and
/// require the intervals to be disjoint (touching allowed).
fn longitudinally_disjoint(a: &LineSegment2D, b: &LineSegment2D) -> bool {
    let (au, av) = a.direction();
    let (bu, bv) = b.direction();
    // Same hemisphere before averaging; directions are axial.
    let (bu, bv) = if au * bu + av * bv >= 0.0 {
        (bu, bv)
    } else {
        (-bu, -bv)
    };
    let norm = ((au + bu).powi(2) + (av + bv).powi(2)).sqrt();
    if norm < 1e-12 {
        return false;
    }
    let (mu, mv) = ((au + bu) / norm, (av + bv) / norm);
    let proj = |p: &PixelPoint| p.u * mu + p.v * mv;
    let (a0, a1) = {
        let (x, y) = (proj(&a.p), proj(&a.q));
        (x.min(y), x.max(y))
    };
    let (b0, b1) = {
        let (x, y) = (proj(&b.p), proj(&b.q));
        (x.min(y), x.max(y))
    };
    a1 <= b0 + 1e-9 || b1 <= a0 + 1e-9
}

fn nearest_endpoint_distance(a: &LineSegment2D, b: &LineSegment2D) -> f64 {
    let mut best = f64::INFINITY;
    for pa in [&a.p, &a.q] {
        for pb in [&b.p, &b.q] {
            best = best.min(pa.distance(pb));
        }
    }
    best
}

/// All three of the paper's criteria: aligned directions, close
/// non-overlapping endpoints, and mutual perpendicular consistency.
fn mergeable(a: &LineSegment2D, b: &LineSegment2D, params: &FusionParams) -> bool {
    if axial_angle_between(a, b) > params.angle_tol_deg.to_radians() {
        return false;
    }
    if nearest_endpoint_distance(a, b) > params.endpoint_gap {
        return false;
    }
    if !longitudinally_disjoint(a, b) {
        return false;
    }
    let perp_ok = a.line_distance_to(&b.p) <= params.perp_tol
        && a.line_distance_to(&b.q) <= params.perp_tol
        && b.line_distance_to(&a.p) <= params.perp_tol
        && b.line_distance_to(&a.q) <= params.perp_tol;
    perp_ok
}

/// The merged segment spans the two farthest endpoints of the pair. The
/// longer input donates level and descriptor.
fn merge(a: &LineSegment2D, b: &LineSegment2D) -> LineSegment2D {
    let pts = [&a.p, &a.q, &b.p, &b.q];
    let (mut bi, mut bj, mut best) = (0, 1, -1.0);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = pts[i].distance(pts[j]);
            if d > best {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    let donor = if a.length() >= b.length() { a } else { b };
    LineSegment2D::new(*pts[bi], *pts[bj], donor.pyramid_level, donor.descriptor)
}

fn canonical_sort(segs: &mut [LineSegment2D]) {
    segs.sort_by(|a, b| {
        b.length()
            .partial_cmp(&a.length())
            .unwrap()
            .then(a.p.u.partial_cmp(&b.p.u).unwrap())
            .then(a.p.v.partial_cmp(&b.p.v).unwrap())
            .then(a.q.u.partial_cmp(&b.q.u).unwrap())
            .then(a.q.v.partial_cmp(&b.q.v).unwrap())
    });
}

/// Iteratively merges every pair that satisfies all three rules until no
/// pair qualifies. Segments are kept canonically sorted between passes, so
/// the fixpoint does not depend on the input order.
pub fn fuse_segments(segs: &[LineSegment2D], params: &FusionParams) -> Vec<LineSegment2D> {
    let mut work: Vec<LineSegment2D> = segs.to_vec();
    canonical_sort(&mut work);
    loop {
        let mut merged_pair: Option<(usize, usize)> = None;
        'outer: for i in 0..work.len() {
            for j in (i + 1)..work.len() {
                if mergeable(&work[i], &work[j], params) {
                    merged_pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        match merged_pair {
            Some((i, j)) => {
                let m = merge(&work[i], &work[j]);
                work.swap_remove(j);
                work.swap_remove(i);
                work.push(m);
                canonical_sort(&mut work);
            }
            None => break,
        }
    }
    work
}

/// Keeps segments whose length is at least `min_length_ratio` of the image
/// diagonal.
pub fn filter_segments(
    segs: &[LineSegment2D],
    min_length_ratio: f64,
    image_width: usize,
    image_height: usize,
) -> Vec<LineSegment2D> {
    assert!(min_length_ratio > 0.0 && min_length_ratio < 1.0);
    let diag = ((image_width * image_width + image_height * image_height) as f64).sqrt();
    let min_len = min_length_ratio * diag;
    segs.iter()
        .filter(|s| s.length() >= min_len)
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seg(p: (f64, f64), q: (f64, f64)) -> LineSegment2D {
        LineSegment2D::new(PixelPoint::new(p.0, p.1), PixelPoint::new(q.0, q.1), 0, 0)
    }

    fn params() -> FusionParams {
        FusionParams::default()
    }

    /// Independent fixpoint oracle: cubic scan with an independently-written
    /// predicate and merge. Pairwise merging is not confluent, so the oracle
    /// follows the same canonical order policy the contract states
    /// (length-descending, then lexicographic endpoints) while recomputing
    /// all geometry from scratch.
    fn brute_force_fuse(segs: &[LineSegment2D], p: &FusionParams) -> Vec<LineSegment2D> {
        let mut work: Vec<LineSegment2D> = segs.to_vec();
        'fix: loop {
            work.sort_by(|a, b| {
                let la = a.p.distance(&a.q);
                let lb = b.p.distance(&b.q);
                lb.partial_cmp(&la)
                    .unwrap()
                    .then(a.p.u.partial_cmp(&b.p.u).unwrap())
                    .then(a.p.v.partial_cmp(&b.p.v).unwrap())
                    .then(a.q.u.partial_cmp(&b.q.u).unwrap())
                    .then(a.q.v.partial_cmp(&b.q.v).unwrap())
            });
            let n = work.len();
            for i in 0..n {
                for j in (i + 1)..n {
                    if oracle_mergeable(&work[i], &work[j], p) {
                        let a = work[i].clone();
                        let b = work[j].clone();
                        work.remove(j);
                        work.remove(i);
                        work.push(oracle_merge(&a, &b));
                        continue 'fix;
                    }
                }
            }
            break;
        }
        work
    }

    fn oracle_mergeable(a: &LineSegment2D, b: &LineSegment2D, p: &FusionParams) -> bool {
        // Angles via atan2 in [0, pi).
        let ang = |s: &LineSegment2D| {
            let mut t = (s.q.v - s.p.v).atan2(s.q.u - s.p.u);
            if t < 0.0 {
                t += std::f64::consts::PI;
            }
            if t >= std::f64::consts::PI {
                t -= std::f64::consts::PI;
            }
            t
        };
        let mut da = (ang(a) - ang(b)).abs();
        da = da.min(std::f64::consts::PI - da);
        if da > p.angle_tol_deg.to_radians() {
            return false;
        }
        let dmin = [a.p, a.q]
            .iter()
            .flat_map(|x| [b.p, b.q].iter().map(|y| x.distance(y)).collect::<Vec<_>>())
            .fold(f64::INFINITY, f64::min);
        if dmin > p.endpoint_gap {
            return false;
        }
        // Overlap via projections onto the mean angle direction.
        let theta_a = ang(a);
        let mut theta_b = ang(b);
        if (theta_a - theta_b).abs() > std::f64::consts::FRAC_PI_2 {
            theta_b += if theta_b < theta_a {
                std::f64::consts::PI
            } else {
                -std::f64::consts::PI
            };
        }
        let theta = (theta_a + theta_b) * 0.5;
        let (mu, mv) = (theta.cos(), theta.sin());
        let pr = |pt: &PixelPoint| pt.u * mu + pt.v * mv;
        let (a0, a1) = ((pr(&a.p)).min(pr(&a.q)), (pr(&a.p)).max(pr(&a.q)));
        let (b0, b1) = ((pr(&b.p)).min(pr(&b.q)), (pr(&b.p)).max(pr(&b.q)));
        if !(a1 <= b0 + 1e-9 || b1 <= a0 + 1e-9) {
            return false;
        }
        let dist = |s: &LineSegment2D, x: &PixelPoint| {
            let (du, dv) = s.direction();
            ((x.u - s.p.u) * dv - (x.v - s.p.v) * du).abs()
        };
        dist(a, &b.p) <= p.perp_tol
            && dist(a, &b.q) <= p.perp_tol
            && dist(b, &a.p) <= p.perp_tol
            && dist(b, &a.q) <= p.perp_tol
    }

    fn oracle_merge(a: &LineSegment2D, b: &LineSegment2D) -> LineSegment2D {
        let pts = [a.p, a.q, b.p, b.q];
        let mut best = (0, 1, -1.0);
        for i in 0..4 {
            for j in 0..4 {
                let d = pts[i].distance(&pts[j]);
                if d > best.2 {
                    best = (i, j, d);
                }
            }
        }
        LineSegment2D::new(pts[best.0], pts[best.1], 0, 0)
    }

    fn as_sorted_endpoint_set(segs: &[LineSegment2D]) -> Vec<(i64, i64, i64, i64)> {
        let mut v: Vec<_> = segs
            .iter()
            .map(|s| {
                (
                    (s.p.u * 1e6).round() as i64,
                    (s.p.v * 1e6).round() as i64,
                    (s.q.u * 1e6).round() as i64,
                    (s.q.v * 1e6).round() as i64,
                )
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn collinear_segments_merge() {
        let out = fuse_segments(&[seg((0.0, 0.0), (10.0, 0.0)), seg((12.0, 0.0), (20.0, 0.0))], &params());
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].p.u, out[0].p.v), (0.0, 0.0));
        assert_eq!((out[0].q.u, out[0].q.v), (20.0, 0.0));
    }

    #[test]
    fn parallel_offset_segments_stay_apart() {
        // 5 px apart perpendicular: rule 3 fails.
        let out = fuse_segments(
            &[seg((0.0, 0.0), (10.0, 0.0)), seg((12.0, 5.0), (20.0, 5.0))],
            &params(),
        );
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn overlapping_segments_stay_apart() {
        // Rule 2: overlap forbids merging.
        let out = fuse_segments(
            &[seg((0.0, 0.0), (10.0, 0.0)), seg((5.0, 0.5), (15.0, 0.5))],
            &params(),
        );
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn matches_brute_force_fixpoint_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..60 {
            let mut segs = Vec::new();
            // Random segments biased toward near-collinear chains.
            for _ in 0..20 {
                if rng.random::<f64>() < 0.6 && !segs.is_empty() {
                    // Extend an existing segment's line beyond its end.
                    let base: &LineSegment2D = &segs[rng.random_range(0..segs.len())];
                    let (du, dv) = base.direction();
                    let gap = rng.random_range(1.0..9.0);
                    let len = rng.random_range(5.0..30.0);
                    let p = PixelPoint::new(base.q.u + du * gap, base.q.v + dv * gap);
                    let q = PixelPoint::new(p.u + du * len, p.v + dv * len);
                    segs.push(LineSegment2D::new(p, q, 0, 0));
                } else {
                    let p = (rng.random_range(0.0..200.0), rng.random_range(0.0..200.0));
                    let ang = rng.random_range(0.0..std::f64::consts::PI);
                    let len = rng.random_range(5.0..60.0);
                    let q = (p.0 + ang.cos() * len, p.1 + ang.sin() * len);
                    segs.push(seg(p, q));
                }
            }
            let ours = fuse_segments(&segs, &params());
            let oracle = brute_force_fuse(&segs, &params());
            assert_eq!(
                as_sorted_endpoint_set(&ours),
                as_sorted_endpoint_set(&oracle),
                "fusion disagrees with brute-force fixpoint"
            );
        }
    }

    #[test]
    fn fusion_is_idempotent_and_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..40 {
            let mut segs: Vec<LineSegment2D> = (0..15)
                .map(|_| {
                    let p = (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
                    let ang = (rng.random_range(0..4) as f64) * std::f64::consts::FRAC_PI_4;
                    let len = rng.random_range(4.0..40.0);
                    seg(p, (p.0 + ang.cos() * len, p.1 + ang.sin() * len))
                })
                .collect();
            let once = fuse_segments(&segs, &params());
            let twice = fuse_segments(&once, &params());
            assert_eq!(as_sorted_endpoint_set(&once), as_sorted_endpoint_set(&twice));
            // Shuffle input; result must be identical.
            for i in (1..segs.len()).rev() {
                let j = rng.random_range(0..=i);
                segs.swap(i, j);
            }
            let shuffled = fuse_segments(&segs, &params());
            assert_eq!(as_sorted_endpoint_set(&once), as_sorted_endpoint_set(&shuffled));
        }
    }

    #[test]
    fn fusion_never_loses_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let segs: Vec<LineSegment2D> = (0..12)
                .map(|_| {
                    let p = (rng.random_range(0.0..80.0), rng.random_range(0.0..80.0));
                    let ang = rng.random_range(0.0..std::f64::consts::PI);
                    let len = rng.random_range(5.0..25.0);
                    seg(p, (p.0 + ang.cos() * len, p.1 + ang.sin() * len))
                })
                .collect();
            let fused = fuse_segments(&segs, &params());
            for s in &segs {
                for e in [&s.p, &s.q] {
                    let covered = fused.iter().any(|f| {
                        f.line_distance_to(e) <= params().perp_tol + 1e-9 && {
                            // Within the fused segment's span (with gap slack).
                            let (du, dv) = f.direction();
                            let t = (e.u - f.p.u) * du + (e.v - f.p.v) * dv;
                            t >= -1e-9 && t <= f.length() + 1e-9
                        }
                    });
                    assert!(covered, "endpoint {e:?} lost after fusion");
                }
            }
        }
    }

    #[test]
    fn filter_keeps_only_long_segments() {
        let segs = vec![
            seg((0.0, 0.0), (5.0, 0.0)),
            seg((0.0, 0.0), (50.0, 0.0)),
            seg((0.0, 0.0), (11.0, 0.0)),
        ];
        // Diagonal of 100x75 = 125; ratio 0.08 -> min length 10.
        let kept = filter_segments(&segs, 0.08, 100, 75);
        assert_eq!(kept.len(), 2);
        // Oracle: independent predicate pass.
        let oracle: Vec<_> = segs.iter().filter(|s| s.length() >= 10.0).collect();
        assert_eq!(kept.len(), oracle.len());
        // All-short set.
        let none = filter_segments(&[seg((0.0, 0.0), (3.0, 0.0))], 0.08, 100, 75);
        assert!(none.is_empty());
    }
}
