use crate::geom::{CameraIntrinsics, PixelPoint, Pose, WorldPoint};
use crate::img::DepthImage;

use super::{FeatureError, LineSegment2D, LineSegment3D};

/// Robust depth at a pixel: median of the valid depths in a 3x3 window.
pub fn robust_depth_at(depth: &DepthImage, px: &PixelPoint) -> Option<f64> {
    let x = px.u.round() as i64;
    let y = px.v.round() as i64;
    let mut vals: Vec<f64> = Vec::with_capacity(9);
    for dy in -1..=1 {
        for dx in -1..=1 {
            let xi = x + dx;
            let yi = y + dy;
            if xi < 0 || yi < 0 || xi >= depth.width as i64 || yi >= depth.height as i64 {
                continue;
            }
            let d = depth.at(xi as usize, yi as usize);
            if d.is_finite() && d > 0.0 {
                vals.push(d);
            }
        }
    }
    if vals.is_empty() {
        return None;
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(vals[vals.len() / 2])
}

/// Depth for a segment endpoint, nudging up to 2 px inward along the
/// segment when the window holds no valid depth.
fn endpoint_depth(
    depth: &DepthImage,
    endpoint: &PixelPoint,
    inward: (f64, f64),
) -> Option<(PixelPoint, f64)> {
    for step in 0..=2 {
        let px = PixelPoint::new(
            endpoint.u + inward.0 * step as f64,
            endpoint.v + inward.1 * step as f64,
        );
        if let Some(d) = robust_depth_at(depth, &px) {
            return Some((px, d));
        }
    }
    None
}

/// Lifts a 2D segment to world coordinates using robust endpoint depths.
pub fn backproject_segment(
    seg: &LineSegment2D,
    depth: &DepthImage,
    intrinsics: &CameraIntrinsics,
    pose: &Pose,
    source_keyframe: usize,
) -> Result<LineSegment3D, FeatureError> {
    let (du, dv) = seg.direction();
    let (p_px, p_d) = endpoint_depth(depth, &seg.p, (du, dv))
        .ok_or(FeatureError::InvalidDepth(seg.p.u, seg.p.v))?;
    let (q_px, q_d) = endpoint_depth(depth, &seg.q, (-du, -dv))
        .ok_or(FeatureError::InvalidDepth(seg.q.u, seg.q.v))?;
    let cam_to_world = pose.inverse();
    let p_cam = intrinsics
        .backproject(p_px, p_d)
        .map_err(|_| FeatureError::InvalidDepth(seg.p.u, seg.p.v))?;
    let q_cam = intrinsics
        .backproject(q_px, q_d)
        .map_err(|_| FeatureError::InvalidDepth(seg.q.u, seg.q.v))?;
    let p_w = cam_to_world.transform_vec(&p_cam.0);
    let q_w = cam_to_world.transform_vec(&q_cam.0);
    Ok(LineSegment3D {
        p: WorldPoint(p_w),
        q: WorldPoint(q_w),
        source_keyframe,
        observations: Vec::new(),
    })
}
