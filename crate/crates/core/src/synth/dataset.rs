use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::geom::CameraIntrinsics;
use crate::img::{save_depth_png, save_rgb_png, DEPTH_PNG_SCALE};
use crate::rng::stream;

use super::raycast::render_frame;
use super::scene::{RoomSpec, SemanticClass};
use super::trajectory::TrajectorySpec;
use super::SynthError;

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub intrinsics: CameraIntrinsics,
    pub seed: u64,
}

fn io(e: impl std::fmt::Display) -> SynthError {
    SynthError::Io(e.to_string())
}

fn ts_name(t: f64) -> String {
    format!("{t:.6}.png")
}

/// Writes the scene/trajectory as a TUM-style RGB-D dataset:
/// `rgb/`, `depth/` (16-bit, 5000 units/m), `semantic/`, `groundtruth.txt`
/// (camera-to-world TUM lines), `lines_gt.txt` and `scene.cfg`.
pub fn write_dataset(
    spec: &RoomSpec,
    traj: &TrajectorySpec,
    cfg: &DatasetConfig,
    outdir: &Path,
) -> Result<PathBuf, SynthError> {
    for sub in ["rgb", "depth", "semantic"] {
        fs::create_dir_all(outdir.join(sub)).map_err(io)?;
    }
    let mut gt = String::from("# timestamp tx ty tz qx qy qz qw\n");
    let mut lines_txt = String::from("# timestamp x1 y1 z1 x2 y2 z2\n");

    for (i, pose) in traj.poses.iter().enumerate() {
        let t = traj.timestamp(i);
        let mut rng = stream(cfg.seed, 0x0F00 + i as u64);
        let (frame, wires) =
            render_frame(spec, pose, &cfg.intrinsics, &traj.noise, t, &mut rng)?;
        save_rgb_png(&frame.rgb, &outdir.join("rgb").join(ts_name(t))).map_err(io)?;
        save_depth_png(&frame.depth, &outdir.join("depth").join(ts_name(t))).map_err(io)?;
        if let Some(sem) = &frame.semantic {
            save_rgb_png(sem, &outdir.join("semantic").join(ts_name(t))).map_err(io)?;
        }

        let inv = pose.inverse();
        let q = inv.rotation_quaternion();
        let c = pose.center();
        writeln!(
            gt,
            "{t:.6} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9}",
            c.x, c.y, c.z, q.i, q.j, q.k, q.w
        )
        .map_err(io)?;

        for wseg in &wires {
            writeln!(
                lines_txt,
                "{t:.6} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9}",
                wseg.a_world.x,
                wseg.a_world.y,
                wseg.a_world.z,
                wseg.b_world.x,
                wseg.b_world.y,
                wseg.b_world.z
            )
            .map_err(io)?;
        }
    }

    fs::write(outdir.join("groundtruth.txt"), gt).map_err(io)?;
    fs::write(outdir.join("lines_gt.txt"), lines_txt).map_err(io)?;

    let k = &cfg.intrinsics;
    let mut cfg_txt = String::new();
    writeln!(cfg_txt, "width = {}", k.width).map_err(io)?;
    writeln!(cfg_txt, "height = {}", k.height).map_err(io)?;
    writeln!(cfg_txt, "fx = {}", k.fx).map_err(io)?;
    writeln!(cfg_txt, "fy = {}", k.fy).map_err(io)?;
    writeln!(cfg_txt, "cx = {}", k.cx).map_err(io)?;
    writeln!(cfg_txt, "cy = {}", k.cy).map_err(io)?;
    writeln!(cfg_txt, "depth_scale = {DEPTH_PNG_SCALE}").map_err(io)?;
    writeln!(cfg_txt, "fps = {}", traj.fps).map_err(io)?;
    writeln!(cfg_txt, "n_frames = {}", traj.poses.len()).map_err(io)?;
    for class in SemanticClass::all() {
        let p = class.palette();
        let name = match class {
            SemanticClass::Floor => "floor",
            SemanticClass::Ceiling => "ceiling",
            SemanticClass::Wall => "wall",
            SemanticClass::Furniture => "furniture",
        };
        writeln!(cfg_txt, "palette_{name} = {} {} {}", p[0], p[1], p[2]).map_err(io)?;
    }
    fs::write(outdir.join("scene.cfg"), cfg_txt).map_err(io)?;

    Ok(outdir.to_path_buf())
}
