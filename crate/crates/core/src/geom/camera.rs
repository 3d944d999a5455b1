use nalgebra::{Matrix2x3, Vector3};

use super::{CameraPoint, GeomError, PixelPoint};

/// Pinhole camera intrinsics, no distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, GeomError> {
        if fx <= 0.0 || fy <= 0.0 {
            return Err(GeomError::BadIntrinsics(format!(
                "focal lengths must be positive, got fx={fx} fy={fy}"
            )));
        }
        if cx < 0.0 || cx >= width as f64 || cy < 0.0 || cy >= height as f64 {
            return Err(GeomError::BadIntrinsics(format!(
                "principal point ({cx}, {cy}) outside {width}x{height} image"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    pub fn project(&self, p: CameraPoint) -> Result<PixelPoint, GeomError> {
        if p.0.z <= 0.0 {
            return Err(GeomError::NonPositiveDepth(p.0.z));
        }
        Ok(PixelPoint {
            u: self.fx * p.0.x / p.0.z + self.cx,
            v: self.fy * p.0.y / p.0.z + self.cy,
        })
    }

    pub fn backproject(&self, px: PixelPoint, depth: f64) -> Result<CameraPoint, GeomError> {
        if depth <= 0.0 || !depth.is_finite() {
            return Err(GeomError::NonPositiveDepth(depth));
        }
        Ok(CameraPoint(Vector3::new(
            (px.u - self.cx) / self.fx * depth,
            (px.v - self.cy) / self.fy * depth,
            depth,
        )))
    }

    /// Jacobian of `project` with respect to the camera-frame point.
    pub fn projection_jacobian(&self, p: &Vector3<f64>) -> Matrix2x3<f64> {
        let iz = 1.0 / p.z;
        let iz2 = iz * iz;
        Matrix2x3::new(
            self.fx * iz,
            0.0,
            -self.fx * p.x * iz2,
            0.0,
            self.fy * iz,
            -self.fy * p.y * iz2,
        )
    }

    pub fn contains(&self, px: &PixelPoint, margin: f64) -> bool {
        px.u >= -margin
            && px.v >= -margin
            && px.u < self.width as f64 + margin
            && px.v < self.height as f64 + margin
    }

    pub fn image_diagonal(&self) -> f64 {
        ((self.width * self.width + self.height * self.height) as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(100.0, 100.0, 50.0, 50.0, 100, 100).unwrap()
    }

    #[test]
    fn optical_axis_projects_to_principal_point() {
        let px = k().project(CameraPoint::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!((px.u, px.v), (50.0, 50.0));
    }

    #[test]
    fn pinhole_hand_case() {
        let px = k().project(CameraPoint::new(1.0, 0.0, 2.0)).unwrap();
        assert_eq!((px.u, px.v), (100.0, 50.0));
    }

    #[test]
    fn zero_depth_rejected() {
        assert!(matches!(
            k().project(CameraPoint::new(0.0, 0.0, 0.0)),
            Err(GeomError::NonPositiveDepth(_))
        ));
        assert!(matches!(
            k().backproject(PixelPoint::new(50.0, 50.0), 0.0),
            Err(GeomError::NonPositiveDepth(_))
        ));
    }

    #[test]
    fn backproject_hand_case() {
        let p = k().backproject(PixelPoint::new(50.0, 50.0), 2.0).unwrap();
        assert_relative_eq!(p.0, Vector3::new(0.0, 0.0, 2.0), epsilon = 1e-12);
    }

    #[test]
    fn project_backproject_roundtrip() {
        let cam = k();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let px = PixelPoint::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
            let d = 10f64.powf(rng.random_range(-3.0..3.0));
            let back = cam.backproject(px, d).unwrap();
            assert_relative_eq!(back.0.z, d, epsilon = 1e-12);
            let fwd = cam.project(back).unwrap();
            assert_relative_eq!(fwd.u, px.u, epsilon = 1e-9);
            assert_relative_eq!(fwd.v, px.v, epsilon = 1e-9);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cam = k();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let p = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..4.0),
            );
            let jac = cam.projection_jacobian(&p);
            let h = 1e-6;
            for c in 0..3 {
                let mut hi = p;
                let mut lo = p;
                hi[c] += h;
                lo[c] -= h;
                let phi = cam.project(CameraPoint(hi)).unwrap();
                let plo = cam.project(CameraPoint(lo)).unwrap();
                assert_relative_eq!(jac[(0, c)], (phi.u - plo.u) / (2.0 * h), epsilon = 1e-4);
                assert_relative_eq!(jac[(1, c)], (phi.v - plo.v) / (2.0 * h), epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn bad_intrinsics_rejected() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0, 10, 10).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 20.0, 0.0, 10, 10).is_err());
    }
}
