use crate::geom::CameraIntrinsics;

use super::{DepthImage, RgbImage};

/// One RGB-D observation: color, depth, optional semantic labels and the
/// intrinsics they were captured with.
#[derive(Debug, Clone)]
pub struct Frame {
    pub timestamp: f64,
    pub rgb: RgbImage,
    pub depth: DepthImage,
    pub semantic: Option<RgbImage>,
    pub intrinsics: CameraIntrinsics,
}
