use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::PulseTrainConfig;

/// Summed matched-filter magnitudes of one block, indexed by lag.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFrame {
    pub values: Vec<f64>,
    pub block_index: usize,
}

/// Inclusive lag window, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub min_lag: usize,
    pub max_lag: usize,
}

impl Gate {
    pub fn from_seconds(min_s: f64, max_s: f64, sample_rate_hz: f64) -> Self {
        Self { min_lag: (min_s * sample_rate_hz).round() as usize, max_lag: (max_s * sample_rate_hz).round() as usize }
    }

    pub fn contains(&self, lag: usize) -> bool {
        (self.min_lag..=self.max_lag).contains(&lag)
    }

    /// Index range of the gate clipped to a frame of `len` lags.
    pub fn span(&self, len: usize) -> std::ops::Range<usize> {
        let end = (self.max_lag + 1).min(len);
        self.min_lag.min(end)..end
    }
}

/// De-cluttered, gated correlation frame. Peak lags track the hand range and
/// peak heights its echo strength.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionFrame {
    pub values: Vec<f64>,
    pub gate: Gate,
}

impl MotionFrame {
    /// Zeroes everything outside `gate`.
    pub fn gated(mut values: Vec<f64>, gate: Gate) -> Self {
        let span = gate.span(values.len());
        for (i, v) in values.iter_mut().enumerate() {
            if !span.contains(&i) {
                *v = 0.0;
            }
        }
        Self { values, gate }
    }

    pub fn zeros(len: usize, gate: Gate) -> Self {
        Self { values: vec![0.0; len], gate }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), gate: self.gate }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeEstimate {
    pub lag: usize,
    pub tof_s: f64,
    pub range_m: f64,
    pub rss: f64,
}

/// Strongest in-gate return of `frame`; equal peaks resolve to the smaller lag.
pub fn estimate_tof_rss(
    frame: &MotionFrame,
    config: &PulseTrainConfig,
    speed_of_sound_mps: f64,
) -> Result<RangeEstimate> {
    let mut best: Option<(usize, f64)> = None;
    for i in frame.gate.span(frame.len()) {
        let v = frame.values[i];
        if v != 0.0 && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    let (lag, rss) = best.ok_or(Error::EmptyFrame)?;
    let tof_s = lag as f64 / config.sample_rate_hz;
    Ok(RangeEstimate { lag, tof_s, range_m: speed_of_sound_mps * tof_s / 2.0, rss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_zeroes_outside() {
        let gate = Gate::from_seconds(0.0005, 0.0035, 192_000.0);
        assert_eq!(gate, Gate { min_lag: 96, max_lag: 672 });
        let f = MotionFrame::gated(vec![1.0; 960], gate);
        for (i, v) in f.values.iter().enumerate() {
            assert_eq!(*v != 0.0, (96..=672).contains(&i));
        }
    }

    #[test]
    fn tie_breaks_to_smaller_lag() {
        let cfg = PulseTrainConfig::default();
        let mut v = vec![0.0; 960];
        v[300] = 2.0;
        v[200] = 2.0;
        let est = estimate_tof_rss(&MotionFrame::gated(v, Gate { min_lag: 96, max_lag: 672 }), &cfg, 343.0).unwrap();
        assert_eq!(est.lag, 200);
        assert_eq!(est.rss, 2.0);
        assert!((est.range_m - 343.0 * 200.0 / (2.0 * 192_000.0)).abs() < 1e-15);
    }

    #[test]
    fn empty_frame_is_an_error() {
        let cfg = PulseTrainConfig::default();
        let mut v = vec![0.0; 960];
        v[10] = 5.0; // outside the gate
        let frame = MotionFrame { values: v, gate: Gate { min_lag: 96, max_lag: 672 } };
        assert!(matches!(estimate_tof_rss(&frame, &cfg, 343.0), Err(Error::EmptyFrame)));
    }
}
