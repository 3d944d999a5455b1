//! Rigid transforms, pinhole projection and robust cost kernels.

mod camera;
mod pose;
mod robust;

pub use camera::CameraIntrinsics;
pub use pose::{nearest_rotation, so3_exp, so3_log, Pose};
pub use robust::{huber, huber_weight, CHI2_2DOF_95};

use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("matrix is not a rotation (deviation {0:.3e})")]
    NotARotation(f64),
    #[error("invalid camera intrinsics: {0}")]
    BadIntrinsics(String),
}

/// A point in world coordinates, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint(pub Vector3<f64>);

/// A point in camera coordinates, meters. `z > 0` is in front of the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPoint(pub Vector3<f64>);

/// Continuous image coordinates, pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl WorldPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }
}

impl CameraPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn distance(&self, other: &PixelPoint) -> f64 {
        ((self.u - other.u).powi(2) + (self.v - other.v).powi(2)).sqrt()
    }
}
