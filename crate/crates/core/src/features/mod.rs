//! Point features and line segments: detection, description, matching,
//! fusion of fragmented segments, and backprojection to 3D.

mod backproject;
mod band;
mod fusion;
mod points;
mod segments;

pub use backproject::{backproject_segment, robust_depth_at};
pub use band::{compute_band_descriptor, match_segments, SEGMENT_DESCRIPTOR_BITS};
pub use fusion::{filter_segments, fuse_segments, FusionParams};
pub use points::{detect_points, match_points, PointDescriptor, PyramidParams};
pub use segments::{detect_segments, SegmentDetectParams};

use crate::geom::{PixelPoint, WorldPoint};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("image is empty or smaller than the detector needs")]
    EmptyImage,
    #[error("no valid depth at segment endpoint ({0:.1}, {1:.1})")]
    InvalidDepth(f64, f64),
}

/// Corner-like feature with its pyramid level and detection variance.
#[derive(Debug, Clone)]
pub struct PointFeature {
    pub px: PixelPoint,
    pub pyramid_level: usize,
    pub descriptor: PointDescriptor,
    /// Detection noise variance, pixels squared, grows with the level.
    pub sigma2: f64,
}

/// 2D line segment with endpoints in level-0 coordinates. Endpoints are
/// stored in canonical order (lexicographic by (u, v)).
#[derive(Debug, Clone)]
pub struct LineSegment2D {
    pub p: PixelPoint,
    pub q: PixelPoint,
    pub pyramid_level: usize,
    pub descriptor: u64,
}

impl LineSegment2D {
    pub fn new(p: PixelPoint, q: PixelPoint, pyramid_level: usize, descriptor: u64) -> Self {
        let (p, q) = if (p.u, p.v) <= (q.u, q.v) { (p, q) } else { (q, p) };
        Self {
            p,
            q,
            pyramid_level,
            descriptor,
        }
    }

    pub fn length(&self) -> f64 {
        self.p.distance(&self.q)
    }

    pub fn midpoint(&self) -> PixelPoint {
        PixelPoint::new((self.p.u + self.q.u) * 0.5, (self.p.v + self.q.v) * 0.5)
    }

    /// Unit direction from p to q.
    pub fn direction(&self) -> (f64, f64) {
        let l = self.length();
        ((self.q.u - self.p.u) / l, (self.q.v - self.p.v) / l)
    }

    /// Perpendicular distance from a point to the infinite line through
    /// this segment.
    pub fn line_distance_to(&self, x: &PixelPoint) -> f64 {
        let (du, dv) = self.direction();
        ((x.u - self.p.u) * dv - (x.v - self.p.v) * du).abs()
    }
}

/// 3D line segment in world coordinates with its observations.
#[derive(Debug, Clone)]
pub struct LineSegment3D {
    pub p: WorldPoint,
    pub q: WorldPoint,
    pub source_keyframe: usize,
    /// (keyframe id, segment index in that keyframe).
    pub observations: Vec<(usize, usize)>,
}

impl LineSegment3D {
    pub fn length(&self) -> f64 {
        (self.p.0 - self.q.0).norm()
    }

    pub fn direction(&self) -> nalgebra::Vector3<f64> {
        (self.q.0 - self.p.0).normalize()
    }
}

/// A correspondence between two descriptor sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    pub index_a: usize,
    pub index_b: usize,
    pub hamming_distance: u32,
}
