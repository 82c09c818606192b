//! Synthetic echo channel: renders what the receiver hears for a hand
//! moving in front of a co-located transmitter/receiver pair.

mod scene;
mod trajectory;

pub use scene::{range_to_delay, simulate_block, simulate_gesture, MultipathTap, Scene, StaticReflector, SubReflector};
pub use trajectory::{GestureKind, JitterRanges, Position, Range, Trajectory};

/// Operating box for the hand, metres.
pub const MIN_DEPTH_M: f64 = 0.10;
pub const MAX_DEPTH_M: f64 = 0.50;
pub const MAX_LATERAL_M: f64 = 0.20;
pub const MAX_SPEED_MPS: f64 = 1.0;

pub(crate) fn scene_default_speed_of_sound() -> f64 {
    scene::default_speed_of_sound()
}
