//! Seeded randomness helpers. All stochastic code in the crate draws from
//! ChaCha8 streams so runs are reproducible across platforms.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Standard normal sample via Box-Muller.
pub fn randn(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1], keeps ln finite
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Derives an independent stream from a base seed and a stream index.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.into());
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn randn_moments() {
        let mut rng = stream(123, 0);
        let n = 100_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let x = randn(&mut rng);
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn streams_are_independent_and_deterministic() {
        let a: Vec<f64> = {
            let mut r = stream(7, 1);
            (0..5).map(|_| randn(&mut r)).collect()
        };
        let b: Vec<f64> = {
            let mut r = stream(7, 1);
            (0..5).map(|_| randn(&mut r)).collect()
        };
        let c: Vec<f64> = {
            let mut r = stream(7, 2);
            (0..5).map(|_| randn(&mut r)).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
