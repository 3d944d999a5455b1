use nalgebra::{Matrix3, UnitQuaternion, Vector3, Vector6};

use super::{CameraPoint, GeomError, WorldPoint};

const ROTATION_TOL: f64 = 1e-9;

/// World-to-camera rigid transform: `x_cam = R * x_world + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose, rejecting matrices that are not proper rotations.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeomError> {
        let dev = (rotation.transpose() * rotation - Matrix3::identity()).norm();
        let det_dev = (rotation.determinant() - 1.0).abs();
        if dev > ROTATION_TOL || det_dev > ROTATION_TOL {
            return Err(GeomError::NotARotation(dev.max(det_dev)));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds a pose from a nearly-orthonormal matrix by projecting onto SO(3).
    pub fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation: nearest_rotation(&rotation),
            translation,
        }
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64, translation: Vector3<f64>) -> Self {
        Self {
            rotation: so3_exp(&(axis.normalize() * angle)),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn transform(&self, p: WorldPoint) -> CameraPoint {
        CameraPoint(self.rotation * p.0 + self.translation)
    }

    pub fn transform_vec(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v + self.translation
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }

    /// Left-multiplicative update by a twist `(ω, v)`: `R ← exp(ω̂)R`,
    /// `t ← exp(ω̂)t + v`. Re-orthonormalizes the rotation.
    pub fn retract(&self, twist: &Vector6<f64>) -> Pose {
        let w = Vector3::new(twist[0], twist[1], twist[2]);
        let v = Vector3::new(twist[3], twist[4], twist[5]);
        let dr = so3_exp(&w);
        Pose {
            rotation: nearest_rotation(&(dr * self.rotation)),
            translation: dr * self.translation + v,
        }
    }

    /// Rotation angle of `self * other⁻¹`, radians.
    pub fn rotation_angle_to(&self, other: &Pose) -> f64 {
        let rel = self.rotation * other.rotation.transpose();
        let c = ((rel.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        c.acos()
    }

    /// Distance between camera centers, meters.
    pub fn center_distance_to(&self, other: &Pose) -> f64 {
        (self.center() - other.center()).norm()
    }

    pub fn rotation_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_matrix(&self.rotation)
    }

    /// Builds the world-to-camera pose from a camera-to-world rotation and
    /// camera center, the convention used by trajectory files.
    pub fn from_camera_to_world(q_wc: &UnitQuaternion<f64>, center: &Vector3<f64>) -> Pose {
        let r_wc = q_wc.to_rotation_matrix().into_inner();
        let r_cw = r_wc.transpose();
        Pose {
            rotation: r_cw,
            translation: -(r_cw * center),
        }
    }
}

/// Rodrigues formula for the SO(3) exponential map.
pub fn so3_exp(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let k = skew(w);
    if theta < 1e-12 {
        return Matrix3::identity() + k;
    }
    let (s, c) = (theta.sin(), theta.cos());
    Matrix3::identity() + k * (s / theta) + k * k * ((1.0 - c) / (theta * theta))
}

/// Logarithm map of SO(3), the rotation vector of `r`.
pub fn so3_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = c.acos();
    if theta < 1e-12 {
        return Vector3::new(
            (r[(2, 1)] - r[(1, 2)]) * 0.5,
            (r[(0, 2)] - r[(2, 0)]) * 0.5,
            (r[(1, 0)] - r[(0, 1)]) * 0.5,
        );
    }
    let axis = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    ) / (2.0 * theta.sin());
    axis * theta
}

pub(crate) fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Projects a matrix onto the nearest proper rotation via SVD.
pub fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        // Flip the axis of the smallest singular value.
        let mut u2 = u;
        u2.column_mut(2).neg_mut();
        r = u2 * vt;
    }
    r
}
