//! Benchmark fixtures shared by the criterion targets.

use echogest_core::eval::{scene_for, DatasetSpec};
use echogest_core::simulator::simulate_gesture;
use echogest_core::{GestureKind, PulseTrainConfig, Waveform};

/// Received blocks of one default-length gesture recording.
pub fn gesture_blocks(gesture: GestureKind, seed: u64) -> Vec<Waveform> {
    let scene = scene_for(&DatasetSpec::default(), gesture, seed);
    simulate_gesture(&scene, &PulseTrainConfig::default()).expect("default scene renders")
}

/// Two labelled point clouds for LS-SVM training benchmarks.
pub fn two_class_points(n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let x = (0..n)
        .map(|i| {
            (0..dim)
                .map(|d| (((i * 31 + d * 17) % 97) as f64 / 48.5 - 1.0) + if i % 2 == 0 { 0.3 } else { -0.3 })
                .collect()
        })
        .collect();
    let y = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    (x, y)
}
