/// 95th percentile of the chi-square distribution with 2 degrees of freedom,
/// the outlier gate for 2-vector residuals.
pub const CHI2_2DOF_95: f64 = 5.991;

/// Huber cost: quadratic for `r <= delta`, linear beyond.
///
/// `r` is a nonnegative residual magnitude.
pub fn huber(r: f64, delta: f64) -> f64 {
    debug_assert!(r >= 0.0 && delta > 0.0);
    if r <= delta {
        0.5 * r * r
    } else {
        delta * (r - 0.5 * delta)
    }
}

/// IRLS weight `ρ'(r)/r` for the Huber kernel.
pub fn huber_weight(r: f64, delta: f64) -> f64 {
    if r <= delta {
        1.0
    } else {
        delta / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_residual() {
        assert_eq!(huber(0.0, 1.0), 0.0);
    }

    #[test]
    fn branch_boundary_agrees() {
        // Both branches evaluate to delta^2/2 at r = delta.
        assert_eq!(huber(1.0, 1.0), 0.5);
        assert_relative_eq!(huber(1.0, 1.0), 1.0 * (1.0 - 0.5), epsilon = 1e-15);
    }

    #[test]
    fn linear_tail_hand_case() {
        // Oracle: direct two-branch evaluation, r=3 delta=1 -> 1*(3 - 0.5) = 2.5.
        assert_eq!(huber(3.0, 1.0), 2.5);
    }

    #[test]
    fn monotone_and_c1() {
        let delta = 0.7;
        let mut prev = -1.0;
        let mut r = 0.0;
        while r < 3.0 {
            let v = huber(r, delta);
            assert!(v >= prev);
            prev = v;
            r += 1e-3;
        }
        // First derivative continuous at the branch point (finite differences).
        let h = 1e-7;
        let d_left = (huber(delta, delta) - huber(delta - h, delta)) / h;
        let d_right = (huber(delta + h, delta) - huber(delta, delta)) / h;
        assert_relative_eq!(d_left, d_right, epsilon = 1e-5);
        assert_relative_eq!(d_left, delta, epsilon = 1e-5);
    }

    #[test]
    fn weight_matches_kernel_derivative() {
        for &(r, delta) in &[(0.2, 1.0), (1.0, 1.0), (4.2, 0.9), (10.0, 2.0)] {
            let w = huber_weight(r, delta);
            if r > 0.0 {
                let h = 1e-7;
                let drho = (huber(r + h, delta) - huber(r - h, delta)) / (2.0 * h);
                assert_relative_eq!(w, drho / r, epsilon = 1e-5);
            }
        }
    }
}
