use nalgebra::{Matrix3, Vector3};

use crate::geom::Pose;

use super::raycast::NoiseParams;
use super::scene::RoomSpec;
use super::SynthError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Orbit,
    Corridor,
    MultiRoomLoop,
}

#[derive(Debug, Clone)]
pub struct TrajectorySpec {
    /// World-to-camera poses, one per frame.
    pub poses: Vec<Pose>,
    pub fps: f64,
    pub noise: NoiseParams,
}

impl TrajectorySpec {
    pub fn timestamp(&self, idx: usize) -> f64 {
        idx as f64 / self.fps
    }
}

/// World-to-camera pose looking from `eye` toward `target`, with the image
/// v-axis pointing against `up`.
pub fn look_at(eye: &Vector3<f64>, target: &Vector3<f64>, up: &Vector3<f64>) -> Pose {
    let forward = (target - eye).normalize();
    let mut right = forward.cross(up);
    if right.norm() < 1e-9 {
        // Degenerate: looking along up; pick any lateral axis.
        right = forward.cross(&Vector3::x());
        if right.norm() < 1e-9 {
            right = forward.cross(&Vector3::y());
        }
    }
    let right = right.normalize();
    let down = forward.cross(&right);
    // Camera-to-world columns are the camera axes expressed in world.
    let r_c2w = Matrix3::from_columns(&[right, down, forward]);
    let r = r_c2w.transpose();
    Pose::from_parts(r, -(r * eye))
}

const MAX_STEP_ANGLE: f64 = 15f64.to_radians();
const MAX_STEP_DIST: f64 = 0.5;

fn check_continuity(poses: &[Pose]) -> bool {
    poses.windows(2).all(|w| {
        w[0].rotation_angle_to(&w[1]) <= MAX_STEP_ANGLE
            && w[0].center_distance_to(&w[1]) <= MAX_STEP_DIST
    })
}

/// Nearest free position to `p` on a coarse spiral in the xy plane.
fn find_free_near(spec: &RoomSpec, p: &Vector3<f64>, margin: f64) -> Option<Vector3<f64>> {
    if spec.is_free(p, margin) {
        return Some(*p);
    }
    for r in 1..=20 {
        let radius = 0.15 * r as f64;
        for k in 0..16 {
            let a = std::f64::consts::TAU * k as f64 / 16.0;
            let q = Vector3::new(p.x + radius * a.cos(), p.y + radius * a.sin(), p.z);
            if spec.is_free(&q, margin) {
                return Some(q);
            }
        }
    }
    None
}

const GRID_RES: f64 = 0.1;
const CLEARANCE: f64 = 0.18;

/// 4-connected BFS over a coarse occupancy grid at the given height.
fn grid_path(
    spec: &RoomSpec,
    from: &Vector3<f64>,
    to: &Vector3<f64>,
    z: f64,
) -> Result<Vec<Vector3<f64>>, SynthError> {
    let (lo, hi) = room_extent(spec);
    let nx = ((hi.x - lo.x) / GRID_RES).ceil() as i64 + 1;
    let ny = ((hi.y - lo.y) / GRID_RES).ceil() as i64 + 1;
    let cell = |p: &Vector3<f64>| {
        (
            ((p.x - lo.x) / GRID_RES).round() as i64,
            ((p.y - lo.y) / GRID_RES).round() as i64,
        )
    };
    let pos = |c: (i64, i64)| Vector3::new(lo.x + c.0 as f64 * GRID_RES, lo.y + c.1 as f64 * GRID_RES, z);
    let free = |c: (i64, i64)| {
        c.0 >= 0 && c.1 >= 0 && c.0 < nx && c.1 < ny && spec.is_free(&pos(c), CLEARANCE)
    };
    let start = cell(from);
    let goal = cell(to);
    if !free(start) || !free(goal) {
        return Err(SynthError::NoFreePath);
    }
    let idx = |c: (i64, i64)| (c.1 * nx + c.0) as usize;
    let mut prev = vec![usize::MAX; (nx * ny) as usize];
    let mut queue = std::collections::VecDeque::new();
    prev[idx(start)] = idx(start);
    queue.push_back(start);
    let mut found = false;
    while let Some(c) = queue.pop_front() {
        if c == goal {
            found = true;
            break;
        }
        for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let n = (c.0 + d.0, c.1 + d.1);
            if free(n) && prev[idx(n)] == usize::MAX {
                prev[idx(n)] = idx(c);
                queue.push_back(n);
            }
        }
    }
    if !found {
        return Err(SynthError::NoFreePath);
    }
    let mut cells = vec![goal];
    let mut cur = idx(goal);
    while prev[cur] != cur {
        cur = prev[cur];
        cells.push((cur as i64 % nx, cur as i64 / nx));
    }
    cells.reverse();
    Ok(cells.into_iter().map(pos).collect())
}

/// Rotates `from` toward `to` by at most `max_angle` radians.
fn rotate_toward(from: &Vector3<f64>, to: &Vector3<f64>, max_angle: f64) -> Vector3<f64> {
    let cosang = from.dot(to).clamp(-1.0, 1.0);
    let angle = cosang.acos();
    if angle <= max_angle {
        return *to;
    }
    let mut axis = from.cross(to);
    if axis.norm() < 1e-9 {
        // Anti-parallel: turn in the horizontal plane.
        axis = Vector3::new(0.0, 0.0, 1.0);
        if from.cross(&axis).norm() < 1e-9 {
            axis = Vector3::new(1.0, 0.0, 0.0);
        }
    }
    let r = crate::geom::so3_exp(&(axis.normalize() * max_angle));
    (r * from).normalize()
}

/// Moving-average smoothing that keeps the endpoints pinned.
fn smooth_path(path: &[Vector3<f64>], window: usize) -> Vec<Vector3<f64>> {
    let n = path.len();
    let half = window / 2;
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                return path[i];
            }
            let a = i.saturating_sub(half);
            let b = (i + half + 1).min(n);
            let sum: Vector3<f64> = path[a..b].iter().sum();
            sum / (b - a) as f64
        })
        .collect()
}

/// Point and direction at arclength `want` along a polyline.
fn sample_polyline(path: &[Vector3<f64>], want: f64) -> (Vector3<f64>, Vector3<f64>) {
    let mut acc = 0.0;
    let mut dir = Vector3::new(0.0, 1.0, 0.0);
    for w in path.windows(2) {
        let seg = w[1] - w[0];
        let l = seg.norm();
        if l < 1e-12 {
            continue;
        }
        dir = seg / l;
        if acc + l >= want {
            return (w[0] + seg * ((want - acc) / l), dir);
        }
        acc += l;
    }
    (*path.last().unwrap(), dir)
}

fn room_extent(spec: &RoomSpec) -> (Vector3<f64>, Vector3<f64>) {
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for (a, b) in &spec.free_space {
        lo = lo.inf(a);
        hi = hi.sup(b);
    }
    (lo, hi)
}

/// Generates a collision-free trajectory in the scene. Poses are expressed
/// world-to-camera; positions and look targets are planned in the scene-local
/// frame and rotated out.
pub fn generate_trajectory(
    spec: &RoomSpec,
    kind: TrajectoryKind,
    n_frames: usize,
    noise: NoiseParams,
) -> Result<TrajectorySpec, SynthError> {
    assert!(n_frames >= 2, "need at least two frames");
    let (lo, hi) = room_extent(spec);
    let center = (lo + hi) * 0.5;
    let up_world: Vector3<f64> = spec.rotation.column(2).into();

    let eye_height = spec.floor_z + (spec.ceiling_z - spec.floor_z) * 0.55;
    let mut positions_local: Vec<Vector3<f64>> = Vec::with_capacity(n_frames);
    let mut targets_local: Vec<Vector3<f64>> = Vec::with_capacity(n_frames);

    match kind {
        TrajectoryKind::Orbit => {
            // Orbit inside the largest free-space box; the union extent of a
            // multi-room scene would circle through dividing walls.
            let (blo, bhi) = spec
                .free_space
                .iter()
                .max_by(|a, b| {
                    let va = (a.1 - a.0).x * (a.1 - a.0).y;
                    let vb = (b.1 - b.0).x * (b.1 - b.0).y;
                    va.partial_cmp(&vb).unwrap()
                })
                .cloned()
                .unwrap_or((lo, hi));
            let center = (blo + bhi) * 0.5;
            let look = Vector3::new(center.x, center.y, eye_height * 0.8);
            let mut radius = 0.5 * ((bhi.x - blo.x).min(bhi.y - blo.y)) - 0.45;
            let mut placed = false;
            while radius > 0.3 {
                let ok = (0..n_frames).all(|i| {
                    let a = std::f64::consts::TAU * i as f64 / n_frames as f64;
                    let p = Vector3::new(
                        center.x + radius * a.cos(),
                        center.y + radius * a.sin(),
                        eye_height,
                    );
                    spec.is_free(&p, 0.15)
                });
                if ok {
                    placed = true;
                    break;
                }
                radius -= 0.1;
            }
            if !placed {
                return Err(SynthError::NoFreePath);
            }
            for i in 0..n_frames {
                let a = std::f64::consts::TAU * i as f64 / n_frames as f64;
                positions_local.push(Vector3::new(
                    center.x + radius * a.cos(),
                    center.y + radius * a.sin(),
                    eye_height,
                ));
                targets_local.push(look);
            }
        }
        TrajectoryKind::Corridor => {
            let margin = 0.6;
            let x = center.x;
            let (y0, y1) = (lo.y + margin, hi.y - margin);
            for i in 0..n_frames {
                let s = i as f64 / (n_frames - 1) as f64;
                let y = y0 + (y1 - y0) * s;
                let p = Vector3::new(x, y, eye_height);
                if !spec.is_free(&p, 0.12) {
                    // Slide sideways around furniture.
                    let mut found = false;
                    for dx in [0.3, -0.3, 0.6, -0.6, 0.9, -0.9] {
                        let q = Vector3::new(x + dx, y, eye_height);
                        if spec.is_free(&q, 0.12) {
                            positions_local.push(q);
                            found = true;
                            break;
                        }
                    }
                    if !found {
                        return Err(SynthError::NoFreePath);
                    }
                } else {
                    positions_local.push(p);
                }
                targets_local.push(Vector3::new(x, y1 + 1.0, eye_height * 0.85));
            }
        }
        TrajectoryKind::MultiRoomLoop => {
            // A closed circuit: small tour of the first room, through the
            // doorway, tour of the second room, and back. The camera never
            // reverses direction, so heading stays continuous everywhere,
            // including at the loop closure.
            let mut cells: Vec<(Vector3<f64>, Vector3<f64>)> = spec.free_space.clone();
            cells.sort_by(|a, b| (a.0.y + a.1.y).partial_cmp(&(b.0.y + b.1.y)).unwrap());
            let (room1, door, room2) = match cells.len() {
                1 => (cells[0], None, None),
                2 => (cells[0], None, Some(cells[1])),
                _ => (cells[0], Some(cells[1]), Some(cells[2])),
            };
            let snap = |p: Vector3<f64>| {
                find_free_near(spec, &p, 0.25).ok_or(SynthError::NoFreePath)
            };
            let anchor = |c: &(Vector3<f64>, Vector3<f64>)| {
                Vector3::new((c.0.x + c.1.x) * 0.5, (c.0.y + c.1.y) * 0.5, eye_height)
            };
            let tour = |c: &(Vector3<f64>, Vector3<f64>)| {
                let a = anchor(c);
                let r = (((c.1.x - c.0.x).min(c.1.y - c.0.y)) * 0.5 - 0.6).max(0.45);
                (a, r)
            };
            let (a1, r1) = tour(&room1);
            let mut waypoints: Vec<Vector3<f64>> = Vec::new();
            waypoints.push(snap(a1)?);
            if let (Some(d), Some(r2c)) = (door, room2) {
                let dmid = snap(anchor(&d))?;
                let (a2, r2) = tour(&r2c);
                waypoints.push(dmid);
                for off in [
                    Vector3::new(r2, 0.0, 0.0),
                    Vector3::new(0.0, r2, 0.0),
                    Vector3::new(-r2, 0.0, 0.0),
                ] {
                    waypoints.push(snap(a2 + off)?);
                }
                waypoints.push(dmid);
                waypoints.push(snap(a1 + Vector3::new(-r1, 0.0, 0.0))?);
            } else {
                // Single room degenerates to a rectangle tour.
                for off in [
                    Vector3::new(0.0, r1, 0.0),
                    Vector3::new(-r1, 0.0, 0.0),
                    Vector3::new(0.0, -r1, 0.0),
                ] {
                    waypoints.push(snap(a1 + off)?);
                }
            }
            waypoints.push(waypoints[0]); // close the circuit
            let mut route: Vec<Vector3<f64>> = Vec::new();
            for w in waypoints.windows(2) {
                let leg = grid_path(spec, &w[0], &w[1], eye_height)?;
                route.extend(leg);
            }
            route.push(route[0]);
            let route = smooth_path(&route, 7);

            let total: f64 = route.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
            for i in 0..n_frames {
                let want = total * i as f64 / (n_frames - 1) as f64;
                let (pos, _) = sample_polyline(&route, want);
                positions_local.push(pos);
            }
            *positions_local.last_mut().unwrap() = positions_local[0];
            // Rate-limited pursuit of the local travel direction, iterated
            // to a periodic steady state over the closed loop; this bounds
            // the per-frame rotation even where the grid route doubles back.
            let m = n_frames - 1; // unique positions
            let mut tangents: Vec<Vector3<f64>> = Vec::with_capacity(m);
            let mut last_t = Vector3::new(0.0, 1.0, 0.0);
            for i in 0..m {
                let d = positions_local[(i + 1) % m] - positions_local[i];
                if d.norm() > 1e-9 {
                    last_t = d.normalize();
                }
                tangents.push(last_t);
            }
            let max_turn = 9f64.to_radians();
            let mut headings = tangents.clone();
            let mut fwd = tangents[0];
            for _lap in 0..4 {
                for i in 0..m {
                    fwd = rotate_toward(&fwd, &tangents[i], max_turn);
                    headings[i] = fwd;
                }
            }
            for i in 0..n_frames {
                let pos = positions_local[i];
                let dir = headings[i % m];
                targets_local.push(pos + dir * 1.5 - Vector3::new(0.0, 0.0, 0.15));
            }
            *targets_local.last_mut().unwrap() = targets_local[0];
        }
    }

    let poses: Vec<Pose> = positions_local
        .iter()
        .zip(&targets_local)
        .map(|(p, t)| {
            let eye = spec.to_world(p);
            let target = spec.to_world(t);
            look_at(&eye, &target, &up_world)
        })
        .collect();

    if !check_continuity(&poses) {
        return Err(SynthError::NoFreePath);
    }

    Ok(TrajectorySpec {
        poses,
        fps: 30.0,
        noise,
    })
}
