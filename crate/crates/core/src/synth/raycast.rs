use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;

use crate::geom::{CameraIntrinsics, PixelPoint, Pose};
use crate::img::{DepthImage, Frame, RgbImage};
use crate::rng::randn;

use super::scene::{RoomSpec, SemanticClass};
use super::SynthError;

/// Per-frame sensor noise. `depth_quad` is the coefficient `a` of the
/// depth-dependent noise sigma `a * d^2`; `pixel_jitter` is the standard
/// deviation, in pixels, of the subpixel ray offset applied to color rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub depth_quad: f64,
    pub pixel_jitter: f64,
}

impl NoiseParams {
    pub fn none() -> Self {
        Self {
            depth_quad: 0.0,
            pixel_jitter: 0.0,
        }
    }

    pub fn is_none(&self) -> bool {
        self.depth_quad == 0.0 && self.pixel_jitter == 0.0
    }
}

/// A visible piece of a box edge: world-frame 3D endpoints plus their
/// image projections.
#[derive(Debug, Clone)]
pub struct WireSegment {
    pub a_world: Vector3<f64>,
    pub b_world: Vector3<f64>,
    pub a_px: PixelPoint,
    pub b_px: PixelPoint,
}

struct Hit {
    t: f64,
    box_idx: usize,
    axis: usize,
    side: f64, // sign of the outward normal along `axis`
    point: Vector3<f64>,
}

/// Slab-method intersection in the scene-local frame. Returns the entry
/// parameter and face information for the nearest box.
fn intersect(
    spec: &RoomSpec,
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    t_min: f64,
) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for (bi, b) in spec.boxes.iter().enumerate() {
        let mut t_enter = t_min;
        let mut t_exit = f64::INFINITY;
        let mut enter_axis = usize::MAX;
        let mut enter_side = 0.0;
        let mut ok = true;
        for a in 0..3 {
            let d = dir[a];
            let (lo, hi) = (b.min[a], b.max[a]);
            if d.abs() < 1e-14 {
                if origin[a] <= lo || origin[a] >= hi {
                    ok = false;
                    break;
                }
                continue;
            }
            let inv = 1.0 / d;
            let (mut t0, mut t1) = ((lo - origin[a]) * inv, (hi - origin[a]) * inv);
            let mut side = -d.signum();
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            if t0 > t_enter {
                t_enter = t0;
                enter_axis = a;
                // Outward normal points against the ray on the entry face.
                side = if d > 0.0 { -1.0 } else { 1.0 };
                enter_side = side;
            }
            let _ = side;
            t_exit = t_exit.min(t1);
            if t_enter > t_exit {
                ok = false;
                break;
            }
        }
        if !ok || enter_axis == usize::MAX {
            continue;
        }
        if best.as_ref().map_or(true, |h| t_enter < h.t) {
            best = Some(Hit {
                t: t_enter,
                box_idx: bi,
                axis: enter_axis,
                side: enter_side,
                point: origin + dir * t_enter,
            });
        }
    }
    best
}

const LIGHT_DIR: [f64; 3] = [0.42, 0.3, -0.855];
const AMBIENT: f64 = 0.62;
const DIFFUSE: f64 = 0.38;

fn shade(axis: usize, side: f64) -> f64 {
    let normal = side; // component of the outward normal along `axis`
    let light = Vector3::new(LIGHT_DIR[0], LIGHT_DIR[1], LIGHT_DIR[2]).normalize();
    AMBIENT + DIFFUSE * (normal * light[axis]).abs()
}

/// Renders a frame by exact ray casting against the scene boxes and extracts
/// the visible parts of every box edge. Noiseless mode is bit-reproducible.
pub fn render_frame(
    spec: &RoomSpec,
    pose: &Pose,
    intrinsics: &CameraIntrinsics,
    noise: &NoiseParams,
    timestamp: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Frame, Vec<WireSegment>), SynthError> {
    let center_world = pose.center();
    let origin = spec.to_local(&center_world);
    if !spec.is_free(&origin, 0.02) {
        return Err(SynthError::PoseInsideGeometry([
            center_world.x,
            center_world.y,
            center_world.z,
        ]));
    }

    let (w, h) = (intrinsics.width, intrinsics.height);
    let mut rgb = RgbImage::new(w, h);
    let mut depth = DepthImage::new(w, h);
    let mut semantic = RgbImage::new(w, h);

    // Camera-to-world rotation, then into the scene-local frame.
    let r_c2w = pose.rotation().transpose();
    let r_cam_to_local = spec.rotation.transpose() * r_c2w;

    for y in 0..h {
        for x in 0..w {
            // Ray with dir_cam.z = 1 so the parameter t equals camera depth.
            let dir_cam = Vector3::new(
                (x as f64 + 0.5 - intrinsics.cx) / intrinsics.fx,
                (y as f64 + 0.5 - intrinsics.cy) / intrinsics.fy,
                1.0,
            );
            let dir = r_cam_to_local * dir_cam;
            if let Some(hit) = intersect(spec, &origin, &dir, 1e-6) {
                let b = &spec.boxes[hit.box_idx];
                let uv_axes = match hit.axis {
                    0 => [1, 2],
                    1 => [0, 2],
                    _ => [0, 1],
                };
                let mut color_hit_uv = [hit.point[uv_axes[0]], hit.point[uv_axes[1]]];
                let mut color_box = hit.box_idx;
                let mut color_axes = uv_axes;
                if noise.pixel_jitter > 0.0 {
                    let dx = randn(rng) * noise.pixel_jitter;
                    let dy = randn(rng) * noise.pixel_jitter;
                    let jdir_cam = Vector3::new(
                        (x as f64 + 0.5 + dx - intrinsics.cx) / intrinsics.fx,
                        (y as f64 + 0.5 + dy - intrinsics.cy) / intrinsics.fy,
                        1.0,
                    );
                    let jdir = r_cam_to_local * jdir_cam;
                    if let Some(jh) = intersect(spec, &origin, &jdir, 1e-6) {
                        let ja = match jh.axis {
                            0 => [1, 2],
                            1 => [0, 2],
                            _ => [0, 1],
                        };
                        color_hit_uv = [jh.point[ja[0]], jh.point[ja[1]]];
                        color_box = jh.box_idx;
                        color_axes = ja;
                    }
                }
                let tex = spec.boxes[color_box]
                    .texture
                    .sample(color_hit_uv, color_axes);
                let s = shade(hit.axis, hit.side);
                rgb.set(x, y, [tex[0] * s, tex[1] * s, tex[2] * s]);
                let mut d = hit.t;
                if noise.depth_quad > 0.0 {
                    d += randn(rng) * noise.depth_quad * hit.t * hit.t;
                }
                depth.set(x, y, d.max(0.0));
                semantic.set(x, y, b.semantic.palette());
            }
        }
    }

    let wires = visible_wireframe(spec, pose, intrinsics, &depth);

    Ok((
        Frame {
            timestamp,
            rgb,
            depth,
            semantic: Some(semantic),
            intrinsics: *intrinsics,
        },
        wires,
    ))
}

/// Visible sub-intervals of all box edges, depth-tested against the
/// rendered (noiseless reference would be ideal, but the rendered map with
/// noise keeps the tolerance below) depth image.
fn visible_wireframe(
    spec: &RoomSpec,
    pose: &Pose,
    intrinsics: &CameraIntrinsics,
    depth: &DepthImage,
) -> Vec<WireSegment> {
    let mut out = Vec::new();
    let mut seen: Vec<(Vector3<f64>, Vector3<f64>)> = Vec::new();
    let step = 0.02;
    for b in &spec.boxes {
        for (a_loc, b_loc) in b.edges() {
            let a_w = spec.to_world(&a_loc);
            let b_w = spec.to_world(&b_loc);
            // Deduplicate edges shared between adjacent boxes.
            let key = if (a_w.x, a_w.y, a_w.z) <= (b_w.x, b_w.y, b_w.z) {
                (a_w, b_w)
            } else {
                (b_w, a_w)
            };
            if seen
                .iter()
                .any(|(p, q)| (p - key.0).norm() < 1e-9 && (q - key.1).norm() < 1e-9)
            {
                continue;
            }
            seen.push(key);

            let len = (b_w - a_w).norm();
            let n = ((len / step).ceil() as usize).max(2);
            let mut run_start: Option<(f64, PixelPoint)> = None;
            let mut last_visible: Option<(f64, PixelPoint)> = None;
            for i in 0..=n {
                let s = i as f64 / n as f64;
                let p_w = a_w + (b_w - a_w) * s;
                let p_c = pose.transform(crate::geom::WorldPoint(p_w));
                let visible = if p_c.0.z > 0.05 {
                    match intrinsics.project(p_c) {
                        Ok(px)
                            if px.u >= 0.0
                                && px.v >= 0.0
                                && px.u < intrinsics.width as f64
                                && px.v < intrinsics.height as f64 =>
                        {
                            let xi = px.u as usize;
                            let yi = px.v as usize;
                            let d_img = depth.at(xi, yi);
                            // Empty rendered depth means nothing in front:
                            // silhouette edges stay visible.
                            d_img <= 0.0 || p_c.0.z <= d_img + 0.02 + 0.02 * d_img
                        }
                        _ => false,
                    }
                } else {
                    false
                };
                if visible {
                    let px = intrinsics.project(p_c).unwrap();
                    if run_start.is_none() {
                        run_start = Some((s, px));
                    }
                    last_visible = Some((s, px));
                } else if let (Some(start), Some(end)) = (run_start.take(), last_visible.take()) {
                    push_run(&mut out, &a_w, &b_w, start, end);
                }
            }
            if let (Some(start), Some(end)) = (run_start, last_visible) {
                push_run(&mut out, &a_w, &b_w, start, end);
            }
        }
    }
    out
}

fn push_run(
    out: &mut Vec<WireSegment>,
    a_w: &Vector3<f64>,
    b_w: &Vector3<f64>,
    start: (f64, PixelPoint),
    end: (f64, PixelPoint),
) {
    let min_px = 10.0;
    if start.1.distance(&end.1) < min_px {
        return;
    }
    out.push(WireSegment {
        a_world: a_w + (b_w - a_w) * start.0,
        b_world: a_w + (b_w - a_w) * end.0,
        a_px: start.1,
        b_px: end.1,
    });
}

/// Class of the semantic color at a pixel, for tests and the pipeline.
pub fn semantic_class_at(img: &RgbImage, x: usize, y: usize) -> SemanticClass {
    SemanticClass::from_color(img.at(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::synth::scene::{BoxSpec, Texture};
    use nalgebra::Matrix3;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::new(120.0, 120.0, 80.0, 60.0, 160, 120).unwrap()
    }

    /// A single wall straight ahead, camera at the origin looking +z.
    fn wall_scene(dist: f64) -> RoomSpec {
        RoomSpec {
            boxes: vec![BoxSpec {
                min: Vector3::new(-10.0, -10.0, dist),
                max: Vector3::new(10.0, 10.0, dist + 0.5),
                texture: Texture::Constant([0.5, 0.5, 0.5]),
                semantic: SemanticClass::Wall,
            }],
            rotation: Matrix3::identity(),
            free_space: vec![(Vector3::new(-10.0, -10.0, -10.0), Vector3::new(10.0, 10.0, dist))],
            floor_z: 0.0,
            ceiling_z: 2.5,
        }
    }

    #[test]
    fn flat_wall_depth_is_constant() {
        let spec = wall_scene(2.0);
        let mut rng = stream(0, 0);
        let (frame, _) = render_frame(
            &spec,
            &Pose::identity(),
            &k(),
            &NoiseParams::none(),
            0.0,
            &mut rng,
        )
        .unwrap();
        for y in 0..120 {
            for x in 0..160 {
                assert!(
                    (frame.depth.at(x, y) - 2.0).abs() < 1e-9,
                    "depth {} at ({x},{y})",
                    frame.depth.at(x, y)
                );
            }
        }
    }

    #[test]
    fn noiseless_render_is_reproducible() {
        let spec = crate::synth::generate_scene(5, crate::synth::SceneTemplate::SingleRoom);
        let center = spec.to_world(&Vector3::new(2.0, 2.5, 1.3));
        let look = spec.to_world(&Vector3::new(2.0, 4.5, 1.0));
        let pose = super::super::trajectory::look_at(&center, &look, &spec.rotation.column(2).into());
        let mut rng1 = stream(0, 0);
        let mut rng2 = stream(9, 9);
        let (f1, w1) = render_frame(&spec, &pose, &k(), &NoiseParams::none(), 0.0, &mut rng1).unwrap();
        let (f2, w2) = render_frame(&spec, &pose, &k(), &NoiseParams::none(), 0.0, &mut rng2).unwrap();
        assert_eq!(f1.rgb.data, f2.rgb.data);
        assert_eq!(f1.depth.data, f2.depth.data);
        assert_eq!(w1.len(), w2.len());
    }

    #[test]
    fn depth_noise_statistics() {
        // sigma = a * d^2 with a = 0.001 at d = 2 -> 0.004 m.
        let spec = wall_scene(2.0);
        let mut rng = stream(1, 2);
        let noise = NoiseParams {
            depth_quad: 0.001,
            pixel_jitter: 0.0,
        };
        let (frame, _) = render_frame(&spec, &Pose::identity(), &k(), &noise, 0.0, &mut rng).unwrap();
        let n = frame.depth.data.len() as f64;
        let mean: f64 = frame.depth.data.iter().sum::<f64>() / n;
        let var: f64 = frame
            .depth
            .data
            .iter()
            .map(|d| (d - mean).powi(2))
            .sum::<f64>()
            / n;
        let std = var.sqrt();
        assert!((std - 0.004).abs() < 0.0004, "std {std}");
        assert!((mean - 2.0).abs() < 3.0 * 0.004 / n.sqrt() * 3.0);
    }

    #[test]
    fn pose_inside_geometry_rejected() {
        let spec = wall_scene(2.0);
        let pose = Pose::from_axis_angle(&Vector3::z(), 0.0, Vector3::new(0.0, 0.0, -2.2));
        // Camera center = -R^T t = (0,0,2.2), inside the wall slab.
        let mut rng = stream(0, 0);
        let r = render_frame(&spec, &pose, &k(), &NoiseParams::none(), 0.0, &mut rng);
        assert!(matches!(r, Err(SynthError::PoseInsideGeometry(_))));
    }

    #[test]
    fn wireframe_matches_independent_projection() {
        // A box edge fully in view: endpoints must project per the pinhole
        // equations evaluated by hand (independent of geom::project).
        let mut spec = wall_scene(4.0);
        spec.boxes.push(BoxSpec {
            min: Vector3::new(-0.5, -0.4, 2.0),
            max: Vector3::new(0.5, 0.4, 2.5),
            texture: Texture::Constant([0.8, 0.2, 0.2]),
            semantic: SemanticClass::Furniture,
        });
        let cam = k();
        let mut rng = stream(0, 0);
        let (_, wires) =
            render_frame(&spec, &Pose::identity(), &cam, &NoiseParams::none(), 0.0, &mut rng)
                .unwrap();
        assert!(!wires.is_empty());
        for wseg in &wires {
            for (p3, p2) in [(wseg.a_world, wseg.a_px), (wseg.b_world, wseg.b_px)] {
                // Identity pose: camera frame == world frame.
                let u = 120.0 * p3.x / p3.z + 80.0;
                let v = 120.0 * p3.y / p3.z + 60.0;
                assert!((u - p2.u).abs() < 1e-9, "u {} vs {}", u, p2.u);
                assert!((v - p2.v).abs() < 1e-9);
            }
        }
    }
}
