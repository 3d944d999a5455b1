//! RGB-D SLAM engine for structured indoor scenes.
//!
//! The system tracks a camera with point and fused line-segment features,
//! maintains a 3D Gaussian scene representation optimized against RGB, depth
//! and semantic observations, aligns the map to its dominant orthogonal
//! directions, completes holes on planar surfaces (floors, ceilings), and
//! extracts a regularized triangle mesh. A procedural box-world generator
//! provides ground-truth data for every stage.

pub mod features;
pub mod geom;
pub mod img;
pub mod mesh;
pub mod pipeline;
pub mod rng;
pub mod splat;
pub mod structure;
pub mod synth;
pub mod track;

pub use geom::{CameraIntrinsics, CameraPoint, GeomError, PixelPoint, Pose, WorldPoint};
pub use img::{DepthImage, GrayImage, RgbImage};

