//! Procedural box-world RGB-D dataset generator.
//!
//! Scenes are collections of axis-aligned textured boxes in a scene-local
//! frame, with a global rotation applied afterwards. Rendering is exact
//! ray-box intersection, fully independent of the splat renderer, so its
//! output can serve as ground truth for every other module.

mod dataset;
mod raycast;
mod scene;
mod trajectory;

pub use dataset::{write_dataset, DatasetConfig};
pub use raycast::{render_frame, NoiseParams, WireSegment};
pub use scene::{generate_scene, BoxSpec, RoomSpec, SceneTemplate, SemanticClass, Texture};
pub use trajectory::{generate_trajectory, look_at, TrajectoryKind, TrajectorySpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("camera pose at {0:?} is inside scene geometry")]
    PoseInsideGeometry([f64; 3]),
    #[error("no collision-free path for the requested trajectory")]
    NoFreePath,
    #[error("dataset io: {0}")]
    Io(String),
}
