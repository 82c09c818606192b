use super::frame::{CorrelationFrame, Gate, MotionFrame};
use crate::error::{Error, Result};

/// Exponentially weighted background subtractor.
///
/// After each frame the background moves toward it by `1 - c`:
/// `background += (1 - c) * (frame - background)`. The output is the frame
/// minus the background held *before* that update, clamped at zero and gated.
/// The first frame seeds the background, so static returns vanish from the
/// first output onward.
#[derive(Debug, Clone)]
pub struct DeclutterState {
    background: Vec<f64>,
    clutter_factor: f64,
    frames_seen: usize,
    gate: Gate,
}

impl DeclutterState {
    pub fn new(clutter_factor: f64, gate: Gate) -> Result<Self> {
        if !(0.0..=1.0).contains(&clutter_factor) {
            return Err(Error::InvalidClutterFactor(clutter_factor));
        }
        Ok(Self { background: Vec::new(), clutter_factor, frames_seen: 0, gate })
    }

    pub fn clutter_factor(&self) -> f64 {
        self.clutter_factor
    }

    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn declutter(&mut self, frame: &CorrelationFrame) -> Result<MotionFrame> {
        if self.frames_seen == 0 {
            self.background = frame.values.clone();
        } else if frame.values.len() != self.background.len() {
            return Err(Error::DimensionMismatch { expected: self.background.len(), actual: frame.values.len() });
        }
        let keep = 1.0 - self.clutter_factor;
        let mut out = Vec::with_capacity(frame.values.len());
        for (bg, &v) in self.background.iter_mut().zip(&frame.values) {
            let diff = v - *bg;
            out.push(diff.max(0.0));
            *bg += keep * diff;
        }
        self.frames_seen += 1;
        Ok(MotionFrame::gated(out, self.gate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GATE: Gate = Gate { min_lag: 0, max_lag: 63 };

    fn frame(values: Vec<f64>) -> CorrelationFrame {
        CorrelationFrame { values, block_index: 0 }
    }

    #[test]
    fn zero_factor_is_first_difference() {
        let mut st = DeclutterState::new(0.0, GATE).unwrap();
        let frames: Vec<Vec<f64>> = (0..6).map(|i| (0..64).map(|j| ((i * 7 + j * 3) % 11) as f64).collect()).collect();
        for (i, f) in frames.iter().enumerate() {
            let out = st.declutter(&frame(f.clone())).unwrap();
            for j in 0..64 {
                let expect = if i == 0 { 0.0 } else { (f[j] - frames[i - 1][j]).max(0.0) };
                assert_eq!(out.values[j], expect);
            }
        }
    }

    #[test]
    fn static_input_cancels_exactly() {
        for c in [0.0, 0.3, 0.8, 0.99] {
            let mut st = DeclutterState::new(c, GATE).unwrap();
            let f: Vec<f64> = (0..64).map(|j| (j as f64 * 0.37).sin().abs() * 1e3).collect();
            for _ in 0..20 {
                assert!(st.declutter(&frame(f.clone())).unwrap().values.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn step_decays_geometrically() {
        let c: f64 = 0.8;
        let mut st = DeclutterState::new(c, GATE).unwrap();
        let base = vec![3.0; 64];
        let mut stepped = base.clone();
        stepped[17] = 8.0;
        for i in 0..40 {
            let f = if i < 10 { &base } else { &stepped };
            let out = st.declutter(&frame(f.clone())).unwrap();
            let expect = if i < 10 { 0.0 } else { 5.0 * c.powi(i - 10) };
            assert!((out.values[17] - expect).abs() <= 1e-9, "frame {i}");
        }
    }

    #[test]
    fn invalid_factor_and_length() {
        assert!(matches!(DeclutterState::new(1.2, GATE), Err(Error::InvalidClutterFactor(_))));
        let mut st = DeclutterState::new(0.5, GATE).unwrap();
        st.declutter(&frame(vec![0.0; 64])).unwrap();
        assert!(st.declutter(&frame(vec![0.0; 32])).is_err());
    }
}
