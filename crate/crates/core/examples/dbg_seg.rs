use strata_core::features::*;
use strata_core::geom::{CameraIntrinsics, PixelPoint};
use strata_core::rng::stream;
use strata_core::synth::*;

fn main() {
    let spec = generate_scene(11, SceneTemplate::SingleRoom);
    let traj = generate_trajectory(&spec, TrajectoryKind::Orbit, 24, NoiseParams::none()).unwrap();
    let k = CameraIntrinsics::new(120.0, 120.0, 80.0, 60.0, 160, 120).unwrap();
    for (pi, pose) in traj.poses.iter().enumerate().step_by(6) {
    let mut rng = stream(0, 0);
    let (frame, wires) = render_frame(&spec, pose, &k, &NoiseParams::none(), 0.0, &mut rng).unwrap();
    let gray = frame.rgb.to_gray();
    let segs = detect_segments(&gray, 2, &SegmentDetectParams::default()).unwrap();
    let fused = fuse_segments(&segs, &FusionParams::default());
    println!("raw segs {} fused {}", segs.len(), fused.len());
    for w in wires.iter().filter(|w| w.a_px.distance(&w.b_px) > 25.0) {
        let gt_dir = {
            let d = (w.b_px.u - w.a_px.u, w.b_px.v - w.a_px.v);
            let l = (d.0 * d.0 + d.1 * d.1).sqrt();
            (d.0 / l, d.1 / l)
        };
        let gt_mid = PixelPoint::new((w.a_px.u + w.b_px.u) * 0.5, (w.a_px.v + w.b_px.v) * 0.5);
        // nearest candidate among fused
        let mut best = (0.0f64, f64::INFINITY, 0.0);
        for s in &fused {
            let ang = {
                let (du, dv) = s.direction();
                (du * gt_dir.0 + dv * gt_dir.1).abs().min(1.0).acos().to_degrees()
            };
            let d = s.line_distance_to(&gt_mid);
            if ang <= 3.0 && d <= 3.0 && s.length() > best.0 { best = (s.length(), d, ang); }
        }
        println!(
            "gt edge mid ({:5.1},{:5.1}) len {:5.1} -> best-aligned len {:5.1} dist {:5.2} angle {:4.1}",
            gt_mid.u, gt_mid.v, w.a_px.distance(&w.b_px), best.0, best.1, best.2
        );
    }
    // dump images for inspection
    strata_core::img::save_rgb_png(&frame.rgb, &std::path::PathBuf::from(format!("/tmp/dbg_rgb_{pi}.png"))).unwrap();
    let mut over = frame.rgb.clone();
    for s in &fused {
        let n = s.length() as usize + 1;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let u = s.p.u + (s.q.u - s.p.u) * t;
            let v = s.p.v + (s.q.v - s.p.v) * t;
            if u >= 0.0 && v >= 0.0 && (u as usize) < over.width && (v as usize) < over.height {
                over.set(u as usize, v as usize, [1.0, 0.0, 0.0]);
            }
        }
    }
    for w in &wires {
        let n = w.a_px.distance(&w.b_px) as usize + 1;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let u = w.a_px.u + (w.b_px.u - w.a_px.u) * t;
            let v = w.a_px.v + (w.b_px.v - w.a_px.v) * t;
            if u >= 0.0 && v >= 0.0 && (u as usize) < over.width && (v as usize) < over.height {
                let mut c = over.at(u as usize, v as usize);
                c[1] = 1.0;
                over.set(u as usize, v as usize, c);
            }
        }
    }
    strata_core::img::save_rgb_png(&over, &std::path::PathBuf::from(format!("/tmp/dbg_overlay_{pi}.png"))).unwrap();
    }
}
// (appended second pass in main is not possible; see below)
