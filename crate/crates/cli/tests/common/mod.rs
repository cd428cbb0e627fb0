#![allow(dead_code)]

use shadowtrack_core::simulate::{Path, SceneConfig};
use shadowtrack_core::{BBox, Detection, Trajectory};

/// 64x64x40, rank 3, two moving shadows, noise 0.01.
pub fn small_scene(seed: u64) -> SceneConfig {
    SceneConfig {
        height: 64,
        width: 64,
        frames: 40,
        rank: 3,
        targets: vec![
            Path::Linear { start: (10.0, 12.0), velocity: (1.0, 0.5) },
            Path::Arc { center: (32.0, 34.0), radius: 18.0, start_angle: 2.0, angular_velocity: 0.06 },
        ],
        shadow_size: (6, 7),
        noise_sigma: 0.01,
        seed,
        ..Default::default()
    }
}

/// 128x128x100, three moving shadows, two static distractors, noise 0.01.
pub fn large_scene(seed: u64) -> SceneConfig {
    SceneConfig {
        height: 128,
        width: 128,
        frames: 100,
        rank: 3,
        targets: vec![
            Path::Linear { start: (15.0, 20.0), velocity: (0.9, 0.4) },
            Path::Linear { start: (110.0, 30.0), velocity: (-0.6, 0.7) },
            Path::Arc { center: (64.0, 70.0), radius: 35.0, start_angle: 0.5, angular_velocity: 0.03 },
        ],
        shadow_size: (7, 8),
        n_static: 2,
        noise_sigma: 0.01,
        seed,
        ..Default::default()
    }
}

/// One target moving right; detections sit on the ground truth with
/// confidence 0.9 for three warm-up frames, then alternate 0.3 / 0.9.
pub fn alternating(frames: u32) -> (Vec<Detection>, Vec<Trajectory>) {
    let boxes: Vec<(u32, BBox)> = (1..=frames)
        .map(|f| (f, BBox::new(10.0 + 0.8 * f as f64, 40.0 + 0.2 * f as f64, 6.0, 7.0).unwrap()))
        .collect();
    let dets = boxes
        .iter()
        .map(|&(f, b)| {
            let conf = if f <= 3 || f % 2 == 0 { 0.9 } else { 0.3 };
            Detection::new(f, b, conf).unwrap()
        })
        .collect();
    (dets, vec![Trajectory::new(1, boxes).unwrap()])
}
