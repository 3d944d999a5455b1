use nalgebra::{Matrix3, Vector3};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use crate::geom::so3_exp;
use crate::rng::stream;

/// Semantic classes with their fixed palette colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemanticClass {
    Floor,
    Ceiling,
    Wall,
    Furniture,
}

impl SemanticClass {
    pub fn palette(self) -> [f64; 3] {
        match self {
            SemanticClass::Floor => [0.1, 0.2, 0.9],
            SemanticClass::Ceiling => [0.9, 0.2, 0.1],
            SemanticClass::Wall => [0.1, 0.9, 0.2],
            SemanticClass::Furniture => [0.9, 0.9, 0.1],
        }
    }

    pub fn all() -> [SemanticClass; 4] {
        [
            SemanticClass::Floor,
            SemanticClass::Ceiling,
            SemanticClass::Wall,
            SemanticClass::Furniture,
        ]
    }

    /// Nearest palette class for a decoded semantic color.
    pub fn from_color(c: [f64; 3]) -> SemanticClass {
        let mut best = SemanticClass::Wall;
        let mut best_d = f64::INFINITY;
        for class in SemanticClass::all() {
            let p = class.palette();
            let d = (0..3).map(|i| (c[i] - p[i]).powi(2)).sum::<f64>();
            if d < best_d {
                best_d = d;
                best = class;
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
pub enum Texture {
    Constant([f64; 3]),
    Checker {
        a: [f64; 3],
        b: [f64; 3],
        cell: f64,
    },
    /// Two colors split along one in-plane axis at a given coordinate.
    TwoTone {
        a: [f64; 3],
        b: [f64; 3],
        axis: usize,
        split: f64,
    },
}

impl Texture {
    /// Sample by the two in-plane local coordinates of a face hit.
    /// `uv_axes` names which local axes the uv coordinates come from.
    pub fn sample(&self, uv: [f64; 2], uv_axes: [usize; 2]) -> [f64; 3] {
        match self {
            Texture::Constant(c) => *c,
            Texture::Checker { a, b, cell } => {
                let i = (uv[0] / cell).floor() as i64 + (uv[1] / cell).floor() as i64;
                if i.rem_euclid(2) == 0 {
                    *a
                } else {
                    *b
                }
            }
            Texture::TwoTone { a, b, axis, split } => {
                let coord = if uv_axes[0] == *axis {
                    uv[0]
                } else if uv_axes[1] == *axis {
                    uv[1]
                } else {
                    // Split axis is perpendicular to this face; fall back to a.
                    return *a;
                };
                if coord < *split {
                    *a
                } else {
                    *b
                }
            }
        }
    }
}

/// Axis-aligned box in the scene-local frame.
#[derive(Debug, Clone)]
pub struct BoxSpec {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
    pub texture: Texture,
    pub semantic: SemanticClass,
}

impl BoxSpec {
    pub fn contains(&self, p: &Vector3<f64>, margin: f64) -> bool {
        (0..3).all(|i| p[i] > self.min[i] - margin && p[i] < self.max[i] + margin)
    }

    /// The 12 edges as local-frame endpoint pairs.
    pub fn edges(&self) -> Vec<(Vector3<f64>, Vector3<f64>)> {
        let (a, b) = (self.min, self.max);
        let c = |x: f64, y: f64, z: f64| Vector3::new(x, y, z);
        vec![
            // bottom rectangle
            (c(a.x, a.y, a.z), c(b.x, a.y, a.z)),
            (c(b.x, a.y, a.z), c(b.x, b.y, a.z)),
            (c(b.x, b.y, a.z), c(a.x, b.y, a.z)),
            (c(a.x, b.y, a.z), c(a.x, a.y, a.z)),
            // top rectangle
            (c(a.x, a.y, b.z), c(b.x, a.y, b.z)),
            (c(b.x, a.y, b.z), c(b.x, b.y, b.z)),
            (c(b.x, b.y, b.z), c(a.x, b.y, b.z)),
            (c(a.x, b.y, b.z), c(a.x, a.y, b.z)),
            // verticals
            (c(a.x, a.y, a.z), c(a.x, a.y, b.z)),
            (c(b.x, a.y, a.z), c(b.x, a.y, b.z)),
            (c(b.x, b.y, a.z), c(b.x, b.y, b.z)),
            (c(a.x, b.y, a.z), c(a.x, b.y, b.z)),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneTemplate {
    SingleRoom,
    TwoRoomApartment,
}

/// A generated scene: boxes in the local frame plus the global rotation
/// `world = rotation * local`.
#[derive(Debug, Clone)]
pub struct RoomSpec {
    pub boxes: Vec<BoxSpec>,
    pub rotation: Matrix3<f64>,
    /// Interior free-space boxes (local frame) the camera may move in.
    pub free_space: Vec<(Vector3<f64>, Vector3<f64>)>,
    /// Top surface height of the floor, local frame.
    pub floor_z: f64,
    pub ceiling_z: f64,
}

impl RoomSpec {
    pub fn to_world(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * local
    }

    pub fn to_local(&self, world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * world
    }

    /// Floor boxes as local-frame rectangles (xmin, xmax, ymin, ymax).
    pub fn floor_rects(&self) -> Vec<[f64; 4]> {
        self.boxes
            .iter()
            .filter(|b| b.semantic == SemanticClass::Floor)
            .map(|b| [b.min.x, b.max.x, b.min.y, b.max.y])
            .collect()
    }

    /// True if a local-frame point is at least `margin` away from all solid
    /// boxes and inside the union of free-space boxes.
    pub fn is_free(&self, local: &Vector3<f64>, margin: f64) -> bool {
        if self.boxes.iter().any(|b| b.contains(local, margin)) {
            return false;
        }
        self.free_space
            .iter()
            .any(|(lo, hi)| (0..3).all(|i| local[i] > lo[i] && local[i] < hi[i]))
    }

    /// Union of furniture footprints as local rectangles; these shadow the
    /// floor from above and create the unobserved holes the completion
    /// stage is expected to fill.
    pub fn furniture_footprints(&self) -> Vec<[f64; 4]> {
        self.boxes
            .iter()
            .filter(|b| b.semantic == SemanticClass::Furniture)
            .map(|b| [b.min.x, b.max.x, b.min.y, b.max.y])
            .collect()
    }
}

const WALL_T: f64 = 0.08;

fn wall_colors(rng: &mut ChaCha8Rng) -> (Texture, Texture) {
    let base = 0.68 + rng.random_range(0.0..0.12);
    let light = [base + 0.14, base + 0.12, base + 0.07];
    let dark = [base - 0.10, base - 0.08, base - 0.12];
    (
        Texture::Checker {
            a: light,
            b: dark,
            cell: 0.5,
        },
        Texture::Checker {
            a: [base + 0.08, base - 0.05, base],
            b: [base - 0.1, base + 0.02, base - 0.08],
            cell: 0.45,
        },
    )
}

fn add_room(
    boxes: &mut Vec<BoxSpec>,
    origin: [f64; 2],
    w: f64,
    l: f64,
    h: f64,
    rng: &mut ChaCha8Rng,
    skip_wall: Option<usize>, // 0=-y, 1=+y, 2=-x, 3=+x
) {
    let (ox, oy) = (origin[0], origin[1]);
    let (tex_a, tex_b) = wall_colors(rng);
    let walls = [
        // (min, max) pairs, local
        (
            Vector3::new(ox - WALL_T, oy - WALL_T, 0.0),
            Vector3::new(ox + w + WALL_T, oy, h),
        ),
        (
            Vector3::new(ox - WALL_T, oy + l, 0.0),
            Vector3::new(ox + w + WALL_T, oy + l + WALL_T, h),
        ),
        (
            Vector3::new(ox - WALL_T, oy, 0.0),
            Vector3::new(ox, oy + l, h),
        ),
        (
            Vector3::new(ox + w, oy, 0.0),
            Vector3::new(ox + w + WALL_T, oy + l, h),
        ),
    ];
    for (i, (mn, mx)) in walls.iter().enumerate() {
        if skip_wall == Some(i) {
            continue;
        }
        boxes.push(BoxSpec {
            min: *mn,
            max: *mx,
            texture: if i % 2 == 0 {
                tex_a.clone()
            } else {
                tex_b.clone()
            },
            semantic: SemanticClass::Wall,
        });
    }
}

fn add_furniture(
    boxes: &mut Vec<BoxSpec>,
    origin: [f64; 2],
    w: f64,
    l: f64,
    rng: &mut ChaCha8Rng,
) {
    let fw = rng.random_range(0.7..1.1);
    let fl = rng.random_range(0.7..1.1);
    let fh = rng.random_range(0.45..0.8);
    let fx = origin[0] + rng.random_range(0.6..(w - fw - 0.6).max(0.61));
    let fy = origin[1] + rng.random_range(0.6..(l - fl - 0.6).max(0.61));
    let hue = rng.random_range(0.0..1.0);
    boxes.push(BoxSpec {
        min: Vector3::new(fx, fy, 0.0),
        max: Vector3::new(fx + fw, fy + fl, fh),
        texture: Texture::Checker {
            a: [0.75, 0.35 + 0.3 * hue, 0.2],
            b: [0.3, 0.2, 0.5 + 0.3 * hue],
            cell: 0.22,
        },
        semantic: SemanticClass::Furniture,
    });
}

/// Deterministic procedural scene for a given seed and template. Every
/// template places at least one furniture box that shadows part of the floor.
pub fn generate_scene(seed: u64, template: SceneTemplate) -> RoomSpec {
    let mut rng = stream(seed, 0xB0);
    let h = rng.random_range(2.3..2.7);
    // Floor tones stay well below the wall tones in luma so wall-floor
    // junction edges keep photometric contrast everywhere.
    let floor_tex = Texture::TwoTone {
        a: [0.45, 0.33, 0.22],
        b: [0.22, 0.17, 0.12],
        axis: 0,
        split: 0.0, // set below once the width is known
    };
    let mut boxes = Vec::new();
    let mut free = Vec::new();

    match template {
        SceneTemplate::SingleRoom => {
            let w = rng.random_range(3.6..4.4);
            let l = rng.random_range(4.6..5.4);
            let split = w * rng.random_range(0.4..0.6);
            boxes.push(BoxSpec {
                min: Vector3::new(0.0, 0.0, -WALL_T),
                max: Vector3::new(w, l, 0.0),
                texture: with_split(floor_tex.clone(), split),
                semantic: SemanticClass::Floor,
            });
            boxes.push(BoxSpec {
                min: Vector3::new(0.0, 0.0, h),
                max: Vector3::new(w, l, h + WALL_T),
                texture: Texture::Constant([0.85, 0.85, 0.82]),
                semantic: SemanticClass::Ceiling,
            });
            add_room(&mut boxes, [0.0, 0.0], w, l, h, &mut rng, None);
            add_furniture(&mut boxes, [0.0, 0.0], w, l, &mut rng);
            free.push((Vector3::new(0.0, 0.0, 0.0), Vector3::new(w, l, h)));
        }
        SceneTemplate::TwoRoomApartment => {
            let w = rng.random_range(3.6..4.2);
            let l1 = rng.random_range(3.4..4.0);
            let l2 = rng.random_range(3.4..4.0);
            let door_w = 1.1;
            let door_x = rng.random_range(0.9..(w - door_w - 0.9));
            let split = w * rng.random_range(0.4..0.6);
            // Two disjoint floor rectangles joined by a doorway strip.
            boxes.push(BoxSpec {
                min: Vector3::new(0.0, 0.0, -WALL_T),
                max: Vector3::new(w, l1 - WALL_T / 2.0, 0.0),
                texture: with_split(floor_tex.clone(), split),
                semantic: SemanticClass::Floor,
            });
            boxes.push(BoxSpec {
                min: Vector3::new(0.0, l1 + WALL_T / 2.0, -WALL_T),
                max: Vector3::new(w, l1 + l2, 0.0),
                texture: with_split(
                    Texture::TwoTone {
                        a: [0.20, 0.30, 0.40],
                        b: [0.38, 0.44, 0.50],
                        axis: 0,
                        split: 0.0,
                    },
                    split,
                ),
                semantic: SemanticClass::Floor,
            });
            boxes.push(BoxSpec {
                min: Vector3::new(door_x, l1 - WALL_T / 2.0, -WALL_T),
                max: Vector3::new(door_x + door_w, l1 + WALL_T / 2.0, 0.0),
                texture: Texture::Constant([0.35, 0.27, 0.2]),
                semantic: SemanticClass::Floor,
            });
            boxes.push(BoxSpec {
                min: Vector3::new(0.0, 0.0, h),
                max: Vector3::new(w, l1 + l2, h + WALL_T),
                texture: Texture::Constant([0.85, 0.85, 0.82]),
                semantic: SemanticClass::Ceiling,
            });
            add_room(&mut boxes, [0.0, 0.0], w, l1 - WALL_T / 2.0, h, &mut rng, Some(1));
            add_room(
                &mut boxes,
                [0.0, l1 + WALL_T / 2.0],
                w,
                l2 - WALL_T / 2.0,
                h,
                &mut rng,
                Some(0),
            );
            // Dividing wall with the doorway gap.
            let (tex, _) = wall_colors(&mut rng);
            boxes.push(BoxSpec {
                min: Vector3::new(-WALL_T, l1 - WALL_T / 2.0, 0.0),
                max: Vector3::new(door_x, l1 + WALL_T / 2.0, h),
                texture: tex.clone(),
                semantic: SemanticClass::Wall,
            });
            boxes.push(BoxSpec {
                min: Vector3::new(door_x + door_w, l1 - WALL_T / 2.0, 0.0),
                max: Vector3::new(w + WALL_T, l1 + WALL_T / 2.0, h),
                texture: tex,
                semantic: SemanticClass::Wall,
            });
            add_furniture(&mut boxes, [0.0, 0.0], w, l1 - WALL_T / 2.0, &mut rng);
            add_furniture(&mut boxes, [0.0, l1 + WALL_T / 2.0], w, l2 - WALL_T / 2.0, &mut rng);
            free.push((Vector3::new(0.0, 0.0, 0.0), Vector3::new(w, l1, h)));
            free.push((Vector3::new(0.0, l1, 0.0), Vector3::new(w, l1 + l2, h)));
            free.push((
                Vector3::new(door_x, l1 - WALL_T, 0.0),
                Vector3::new(door_x + door_w, l1 + WALL_T, h),
            ));
        }
    }

    // Global rotation: free yaw plus a small tilt so floors stay near
    // horizontal in world frame while still exercising calibration.
    let yaw = rng.random_range(0.0..std::f64::consts::TAU);
    let tilt_x = rng.random_range(-0.03..0.03);
    let tilt_y = rng.random_range(-0.03..0.03);
    let rotation = so3_exp(&Vector3::new(0.0, 0.0, yaw))
        * so3_exp(&Vector3::new(tilt_x, 0.0, 0.0))
        * so3_exp(&Vector3::new(0.0, tilt_y, 0.0));

    RoomSpec {
        boxes,
        rotation,
        free_space: free,
        floor_z: 0.0,
        ceiling_z: h,
    }
}

fn with_split(tex: Texture, split: f64) -> Texture {
    match tex {
        Texture::TwoTone { a, b, axis, .. } => Texture::TwoTone { a, b, axis, split },
        other => other,
    }
}
