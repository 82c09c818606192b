use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{MAX_DEPTH_M, MAX_LATERAL_M, MAX_SPEED_MPS, MIN_DEPTH_M};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureKind {
    Fwd,
    FwdBwd,
    SwipeLtr,
    SwipeRtl,
    HoldHand,
    NoGesture,
}

impl GestureKind {
    /// The five gesture classes in confusion-matrix order.
    pub const GESTURES: [GestureKind; 5] =
        [GestureKind::SwipeRtl, GestureKind::SwipeLtr, GestureKind::HoldHand, GestureKind::FwdBwd, GestureKind::Fwd];

    pub const ALL: [GestureKind; 6] = [
        GestureKind::SwipeRtl,
        GestureKind::SwipeLtr,
        GestureKind::HoldHand,
        GestureKind::FwdBwd,
        GestureKind::Fwd,
        GestureKind::NoGesture,
    ];

    /// Row/column index in [`GestureKind::GESTURES`]; `None` for `NoGesture`.
    pub fn class_index(self) -> Option<usize> {
        Self::GESTURES.iter().position(|&g| g == self)
    }

    pub fn is_push(self) -> bool {
        matches!(self, GestureKind::Fwd | GestureKind::FwdBwd)
    }

    pub fn is_swipe(self) -> bool {
        matches!(self, GestureKind::SwipeLtr | GestureKind::SwipeRtl)
    }

    /// Human-readable table label.
    pub fn label(self) -> &'static str {
        match self {
            GestureKind::SwipeRtl => "Right-Left",
            GestureKind::SwipeLtr => "Left-Right",
            GestureKind::HoldHand => "Hold Hand",
            GestureKind::FwdBwd => "Fwd-Bwd",
            GestureKind::Fwd => "Fwd",
            GestureKind::NoGesture => "No Gesture",
        }
    }

    /// Identifier used on the command line and in files.
    pub fn key(self) -> &'static str {
        match self {
            GestureKind::Fwd => "fwd",
            GestureKind::FwdBwd => "fwd_bwd",
            GestureKind::SwipeLtr => "swipe_ltr",
            GestureKind::SwipeRtl => "swipe_rtl",
            GestureKind::HoldHand => "hold_hand",
            GestureKind::NoGesture => "no_gesture",
        }
    }
}

impl fmt::Display for GestureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for GestureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match norm.as_str() {
            "fwd" => GestureKind::Fwd,
            "fwd_bwd" | "fwdbwd" => GestureKind::FwdBwd,
            "swipe_ltr" | "ltr" | "left_right" => GestureKind::SwipeLtr,
            "swipe_rtl" | "rtl" | "right_left" => GestureKind::SwipeRtl,
            "hold_hand" | "hold" => GestureKind::HoldHand,
            "no_gesture" | "none" => GestureKind::NoGesture,
            _ => return Err(Error::InvalidConfig(format!("unknown gesture '{s}'"))),
        })
    }
}

/// Hand position: `depth_m` away from the sensor face, `lateral_m` across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub depth_m: f64,
    pub lateral_m: f64,
}

impl Position {
    pub fn new(depth_m: f64, lateral_m: f64) -> Self {
        Self { depth_m, lateral_m }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.depth_m - other.depth_m).hypot(self.lateral_m - other.lateral_m)
    }

    fn lerp(&self, other: &Position, s: f64) -> Position {
        Position {
            depth_m: self.depth_m + (other.depth_m - self.depth_m) * s,
            lateral_m: self.lateral_m + (other.lateral_m - self.lateral_m) * s,
        }
    }

    fn in_box(&self) -> bool {
        const EPS: f64 = 1e-12;
        (MIN_DEPTH_M - EPS..=MAX_DEPTH_M + EPS).contains(&self.depth_m) && self.lateral_m.abs() <= MAX_LATERAL_M + EPS
    }
}

/// Parametric hand path over one gesture window.
///
/// Motions use a raised-cosine easing, so the speed peaks at
/// `peak_speed_mps` mid-move and is zero at both ends. Before `onset_s` the
/// hand rests at `start`.
///
/// * `Fwd`, `SwipeLtr`, `SwipeRtl`: one move `start -> end`, then rest.
/// * `FwdBwd`, `HoldHand`: `start -> end`, rest for `hold_fraction` of the
///   window, `end -> start`. A hold fraction of 1 keeps the hand at `end`
///   for the whole window.
/// * `NoGesture`: no hand in the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub gesture: GestureKind,
    pub duration_s: f64,
    pub start: Position,
    pub end: Position,
    pub peak_speed_mps: f64,
    pub onset_s: f64,
    pub hold_fraction: f64,
}

impl Trajectory {
    pub fn absent(duration_s: f64) -> Self {
        Self {
            gesture: GestureKind::NoGesture,
            duration_s,
            start: Position::new(0.3, 0.0),
            end: Position::new(0.3, 0.0),
            peak_speed_mps: MAX_SPEED_MPS,
            onset_s: 0.0,
            hold_fraction: 0.0,
        }
    }

    fn round_trip(&self) -> bool {
        matches!(self.gesture, GestureKind::FwdBwd | GestureKind::HoldHand)
    }

    /// Duration of one `start <-> end` move.
    pub fn move_time_s(&self) -> f64 {
        PI * self.start.distance(&self.end) / (2.0 * self.peak_speed_mps)
    }

    fn busy_time_s(&self) -> f64 {
        let moves = if self.round_trip() { 2.0 } else { 1.0 };
        let hold = if self.round_trip() { self.hold_fraction * self.duration_s } else { 0.0 };
        self.onset_s + moves * self.move_time_s() + hold
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("trajectory duration {} must be positive", self.duration_s));
        }
        if self.gesture == GestureKind::NoGesture {
            return Ok(());
        }
        if !self.start.in_box() || !self.end.in_box() {
            return bad(format!("trajectory endpoints {:?} -> {:?} leave the operating box", self.start, self.end));
        }
        if !(self.peak_speed_mps > 0.0 && self.peak_speed_mps <= MAX_SPEED_MPS) {
            return bad(format!("peak speed {} outside (0, {MAX_SPEED_MPS}]", self.peak_speed_mps));
        }
        if !(0.0..=1.0).contains(&self.hold_fraction) || self.onset_s < 0.0 {
            return bad("hold fraction must lie in [0, 1] and onset must be non-negative".into());
        }
        if !(self.round_trip() && self.hold_fraction >= 1.0) && self.busy_time_s() > self.duration_s + 1e-9 {
            return bad(format!(
                "gesture needs {:.3} s but the window is {:.3} s",
                self.busy_time_s(),
                self.duration_s
            ));
        }
        Ok(())
    }

    /// Hand position at time `t` (seconds from window start); `None` when no
    /// hand is present.
    pub fn position_at(&self, t: f64) -> Option<Position> {
        if self.gesture == GestureKind::NoGesture {
            return None;
        }
        if self.round_trip() && self.hold_fraction >= 1.0 {
            return Some(self.end);
        }
        let move_t = self.move_time_s();
        let ease = |u: f64| 0.5 * (1.0 - (PI * u.clamp(0.0, 1.0)).cos());
        let out = |t: f64| {
            if move_t <= 0.0 {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                ease(t / move_t)
            }
        };
        let t = t - self.onset_s;
        let s = if self.round_trip() {
            let back_at = move_t + self.hold_fraction * self.duration_s;
            if t < back_at {
                out(t)
            } else {
                1.0 - out(t - back_at)
            }
        } else {
            out(t)
        };
        Some(self.start.lerp(&self.end, s))
    }

    /// Draws a randomized trajectory for `gesture` within `jitter`.
    pub fn randomized<R: Rng + ?Sized>(
        gesture: GestureKind,
        duration_s: f64,
        jitter: &JitterRanges,
        rng: &mut R,
    ) -> Trajectory {
        let mut t = Trajectory::absent(duration_s);
        t.gesture = gesture;
        t.onset_s = jitter.onset_s.sample(rng);
        t.peak_speed_mps = jitter.peak_speed_mps.sample(rng);
        match gesture {
            GestureKind::NoGesture => return t,
            GestureKind::Fwd | GestureKind::FwdBwd => {
                let lateral = jitter.push_lateral_m.sample(rng);
                t.start = Position::new(jitter.push_far_depth_m.sample(rng), lateral);
                t.end = Position::new(jitter.push_near_depth_m.sample(rng), lateral + jitter.push_drift_m.sample(rng));
                if gesture == GestureKind::FwdBwd {
                    t.hold_fraction = jitter.push_hold_fraction.sample(rng);
                }
            }
            GestureKind::SwipeLtr | GestureKind::SwipeRtl => {
                // The path is fixed in the world frame: the right-hand side of
                // the sweep lies deeper than the left-hand side.
                let depth = jitter.swipe_depth_m.sample(rng);
                let left = Position::new(depth, -jitter.swipe_edge_m.sample(rng));
                let right = Position::new(depth + jitter.swipe_tilt_m.sample(rng), jitter.swipe_edge_m.sample(rng));
                (t.start, t.end) = if gesture == GestureKind::SwipeLtr { (left, right) } else { (right, left) };
            }
            GestureKind::HoldHand => {
                let depth = jitter.hold_depth_m.sample(rng);
                let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                t.start = Position::new(depth, side * jitter.hold_entry_lateral_m.sample(rng));
                t.end = Position::new(depth + jitter.hold_depth_drift_m.sample(rng), jitter.hold_lateral_m.sample(rng));
                t.hold_fraction = jitter.hold_fraction.sample(rng);
            }
        }
        t.start = t.start.clamp_to_box();
        t.end = t.end.clamp_to_box();
        t.fit_schedule();
        t
    }

    /// Speeds up, then trims onset and hold, until the motion fits the window.
    fn fit_schedule(&mut self) {
        if self.busy_time_s() <= self.duration_s {
            return;
        }
        let moves = if self.round_trip() { 2.0 } else { 1.0 };
        let dist = self.start.distance(&self.end);
        let spare = self.duration_s - self.busy_time_s() + moves * self.move_time_s();
        if spare > 0.0 {
            let needed = moves * PI * dist / (2.0 * spare);
            self.peak_speed_mps = self.peak_speed_mps.max(needed).min(MAX_SPEED_MPS);
        }
        let mut excess = self.busy_time_s() - self.duration_s;
        if excess > 0.0 {
            let cut = excess.min(self.onset_s);
            self.onset_s -= cut;
            excess -= cut;
        }
        if excess > 0.0 && self.round_trip() {
            let hold = (self.hold_fraction * self.duration_s - excess).max(0.0);
            self.hold_fraction = hold / self.duration_s;
        }
    }
}

impl Position {
    fn clamp_to_box(self) -> Position {
        Position {
            depth_m: self.depth_m.clamp(MIN_DEPTH_M, MAX_DEPTH_M),
            lateral_m: self.lateral_m.clamp(-MAX_LATERAL_M, MAX_LATERAL_M),
        }
    }
}

/// Closed interval sampled uniformly; `min == max` yields the constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn fixed(v: f64) -> Self {
        Self { min: v, max: v }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.max <= self.min {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

/// Per-gesture randomization ranges used when generating datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JitterRanges {
    pub onset_s: Range,
    pub peak_speed_mps: Range,
    pub push_far_depth_m: Range,
    pub push_near_depth_m: Range,
    pub push_lateral_m: Range,
    pub push_drift_m: Range,
    pub push_hold_fraction: Range,
    pub swipe_depth_m: Range,
    pub swipe_tilt_m: Range,
    pub swipe_edge_m: Range,
    pub hold_depth_m: Range,
    pub hold_depth_drift_m: Range,
    pub hold_entry_lateral_m: Range,
    pub hold_lateral_m: Range,
    pub hold_fraction: Range,
    /// Multiplier on the scene's base reflection coefficient.
    pub reflection_scale: Range,
}

impl Default for JitterRanges {
    fn default() -> Self {
        Self {
            onset_s: Range::new(0.1, 0.4),
            peak_speed_mps: Range::new(0.6, 0.95),
            push_far_depth_m: Range::new(0.36, 0.48),
            push_near_depth_m: Range::new(0.12, 0.20),
            push_lateral_m: Range::new(-0.05, 0.05),
            push_drift_m: Range::new(-0.02, 0.02),
            push_hold_fraction: Range::new(0.0, 0.1),
            swipe_depth_m: Range::new(0.18, 0.32),
            swipe_tilt_m: Range::new(0.06, 0.12),
            swipe_edge_m: Range::new(0.16, 0.20),
            hold_depth_m: Range::new(0.20, 0.35),
            hold_depth_drift_m: Range::new(-0.03, 0.03),
            hold_entry_lateral_m: Range::new(0.14, 0.20),
            hold_lateral_m: Range::new(-0.04, 0.04),
            hold_fraction: Range::new(0.3, 0.5),
            reflection_scale: Range::new(0.7, 1.3),
        }
    }
}

impl JitterRanges {
    /// Every range collapsed to its midpoint.
    pub fn frozen(&self) -> Self {
        let f = |r: Range| Range::fixed(r.midpoint());
        Self {
            onset_s: f(self.onset_s),
            peak_speed_mps: f(self.peak_speed_mps),
            push_far_depth_m: f(self.push_far_depth_m),
            push_near_depth_m: f(self.push_near_depth_m),
            push_lateral_m: f(self.push_lateral_m),
            push_drift_m: f(self.push_drift_m),
            push_hold_fraction: f(self.push_hold_fraction),
            swipe_depth_m: f(self.swipe_depth_m),
            swipe_tilt_m: f(self.swipe_tilt_m),
            swipe_edge_m: f(self.swipe_edge_m),
            hold_depth_m: f(self.hold_depth_m),
            hold_depth_drift_m: f(self.hold_depth_drift_m),
            hold_entry_lateral_m: f(self.hold_entry_lateral_m),
            hold_lateral_m: f(self.hold_lateral_m),
            hold_fraction: f(self.hold_fraction),
            reflection_scale: f(self.reflection_scale),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gesture_strategy() -> impl Strategy<Value = GestureKind> {
        prop::sample::select(GestureKind::ALL.to_vec())
    }

    #[test]
    fn gesture_names_round_trip() {
        for g in GestureKind::ALL {
            assert_eq!(g.key().parse::<GestureKind>().unwrap(), g);
        }
        assert_eq!("Fwd-Bwd".parse::<GestureKind>().unwrap(), GestureKind::FwdBwd);
        assert!("wave".parse::<GestureKind>().is_err());
    }

    #[test]
    fn hold_fraction_one_is_static() {
        let mut t = Trajectory::absent(2.0);
        t.gesture = GestureKind::HoldHand;
        t.start = Position::new(0.3, 0.18);
        t.end = Position::new(0.3, 0.0);
        t.hold_fraction = 1.0;
        t.validate().unwrap();
        for i in 0..50 {
            assert_eq!(t.position_at(i as f64 * 0.04), Some(t.end));
        }
    }

    #[test]
    fn fwd_bwd_returns_to_start() {
        let mut t = Trajectory::absent(2.0);
        t.gesture = GestureKind::FwdBwd;
        t.start = Position::new(0.45, 0.0);
        t.end = Position::new(0.15, 0.0);
        t.peak_speed_mps = 0.9;
        t.onset_s = 0.2;
        t.validate().unwrap();
        assert_eq!(t.position_at(0.0), Some(t.start));
        let mid = t.onset_s + t.move_time_s();
        assert!((t.position_at(mid).unwrap().depth_m - 0.15).abs() < 1e-12);
        assert!((t.position_at(1.99).unwrap().depth_m - 0.45).abs() < 1e-12);
    }

    #[test]
    fn overlong_schedule_rejected() {
        let mut t = Trajectory::absent(2.0);
        t.gesture = GestureKind::Fwd;
        t.start = Position::new(0.5, -0.2);
        t.end = Position::new(0.1, 0.2);
        t.peak_speed_mps = 0.2;
        assert!(t.validate().is_err());
    }

    proptest! {
        #[test]
        fn randomized_paths_stay_in_box_and_under_speed(seed in any::<u64>(), g in gesture_strategy()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = Trajectory::randomized(g, 2.0, &JitterRanges::default(), &mut rng);
            prop_assert!(t.validate().is_ok(), "{:?}", t);
            let dt = 1e-3;
            let mut prev = t.position_at(0.0);
            for i in 1..=2000 {
                let p = t.position_at(i as f64 * dt);
                if let (Some(a), Some(b)) = (prev, p) {
                    prop_assert!(b.in_box());
                    prop_assert!(a.distance(&b) / dt <= MAX_SPEED_MPS + 1e-6);
                }
                prev = p;
            }
        }
    }
}
