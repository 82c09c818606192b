//! Transmit waveform design: alternating up/down LFM chirps gated into a
//! block of `N` pulses, one pulse per period.
//!
//! Each chirp sweeps linearly across `[fc - B, fc + B]`. The phase reference
//! sits at the pulse midpoint, which makes the down-chirp the exact
//! (sign-flipped) time reversal of the up-chirp.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timing and frequency parameters of the transmitted pulse train.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseTrainConfig {
    pub carrier_freq_hz: f64,
    pub half_bandwidth_hz: f64,
    /// Active chirp duration (T1).
    pub pulse_len_s: f64,
    /// Pulse repetition period (T2).
    pub pulse_period_s: f64,
    /// Pulses per processing block (N).
    pub pulses_per_block: usize,
    pub sample_rate_hz: f64,
    pub amplitude: f64,
    /// Tukey taper ratio in `(0, 1]`; `None` keeps rectangular pulses.
    pub taper: Option<f64>,
}

impl Default for PulseTrainConfig {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 38_800.0,
            half_bandwidth_hz: 3_500.0,
            pulse_len_s: 0.0005,
            pulse_period_s: 0.005,
            pulses_per_block: 4,
            sample_rate_hz: 192_000.0,
            amplitude: 1.0,
            taper: None,
        }
    }
}

impl PulseTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [
            self.carrier_freq_hz,
            self.half_bandwidth_hz,
            self.pulse_len_s,
            self.pulse_period_s,
            self.sample_rate_hz,
            self.amplitude,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("pulse train parameters must be finite".into());
        }
        if self.sample_rate_hz <= 0.0 {
            return bad(format!("sample rate {} must be positive", self.sample_rate_hz));
        }
        if self.half_bandwidth_hz < 0.0 || self.carrier_freq_hz - self.half_bandwidth_hz <= 0.0 {
            return bad(format!(
                "band [{}, {}] Hz must lie above 0 Hz",
                self.carrier_freq_hz - self.half_bandwidth_hz,
                self.carrier_freq_hz + self.half_bandwidth_hz
            ));
        }
        if self.carrier_freq_hz + self.half_bandwidth_hz >= self.sample_rate_hz / 2.0 {
            return bad(format!(
                "upper band edge {} Hz violates Nyquist for {} Hz sampling",
                self.carrier_freq_hz + self.half_bandwidth_hz,
                self.sample_rate_hz
            ));
        }
        if self.pulse_len_s <= 0.0 || self.pulse_len_s >= self.pulse_period_s {
            return bad(format!(
                "pulse length {} s must be positive and shorter than the period {} s",
                self.pulse_len_s, self.pulse_period_s
            ));
        }
        if self.pulses_per_block == 0 {
            return bad("pulses_per_block must be at least 1".into());
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return bad(format!("amplitude {} outside (0, 1]", self.amplitude));
        }
        if let Some(r) = self.taper {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("taper ratio {r} outside (0, 1]"));
            }
        }
        if self.pulse_samples() == 0 {
            return bad("pulse shorter than one sample".into());
        }
        Ok(())
    }

    /// Samples per chirp, `round(T1 * fs)`.
    pub fn pulse_samples(&self) -> usize {
        (self.pulse_len_s * self.sample_rate_hz).round() as usize
    }

    /// Samples per pulse period, `round(T2 * fs)`.
    pub fn period_samples(&self) -> usize {
        (self.pulse_period_s * self.sample_rate_hz).round() as usize
    }

    /// Samples per block, `round(N * T2 * fs)`.
    pub fn block_samples(&self) -> usize {
        (self.pulses_per_block as f64 * self.pulse_period_s * self.sample_rate_hz).round() as usize
    }

    /// Block duration T3 = N * T2.
    pub fn block_len_s(&self) -> f64 {
        self.pulses_per_block as f64 * self.pulse_period_s
    }

    /// Sample offset of pulse `k` inside its block.
    pub fn pulse_offset(&self, k: usize) -> usize {
        (k as f64 * self.pulse_period_s * self.sample_rate_hz).round() as usize
    }

    /// Sweep direction of pulse `k` (0-indexed): even pulses sweep up.
    pub fn direction_of(k: usize) -> ChirpDirection {
        if k.is_multiple_of(2) {
            ChirpDirection::Up
        } else {
            ChirpDirection::Down
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChirpDirection {
    Up,
    Down,
}

/// A real-valued sampled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidConfig(format!("sample rate {sample_rate_hz} must be positive")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedData(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Self {
        Self { samples: vec![0.0; len], sample_rate_hz }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Tukey window weight for sample `n` of `len`, taper ratio `r`.
fn tukey(n: usize, len: usize, r: f64) -> f64 {
    if len <= 1 {
        return 1.0;
    }
    let x = n as f64 / (len - 1) as f64;
    let edge = r / 2.0;
    if x < edge {
        0.5 * (1.0 - (PI * x / edge).cos())
    } else if x > 1.0 - edge {
        0.5 * (1.0 - (PI * (1.0 - x) / edge).cos())
    } else {
        1.0
    }
}

/// One LFM pulse of `round(T1 * fs)` samples.
pub fn make_chirp(config: &PulseTrainConfig, direction: ChirpDirection) -> Result<Waveform> {
    config.validate()?;
    let len = config.pulse_samples();
    let fs = config.sample_rate_hz;
    let fc = config.carrier_freq_hz;
    // Sweep spans the sampled support so the end samples sit on fc -/+ B.
    let span_s = (len - 1) as f64 / fs;
    let rate = if span_s > 0.0 { 2.0 * config.half_bandwidth_hz / span_s } else { 0.0 };
    let half_rate = match direction {
        ChirpDirection::Up => rate / 2.0,
        ChirpDirection::Down => -rate / 2.0,
    };
    let center = (len - 1) as f64 / 2.0;
    let samples = (0..len)
        .map(|n| {
            let t = (n as f64 - center) / fs;
            let phase = 2.0 * PI * (fc * t + half_rate * t * t);
            let window = config.taper.map_or(1.0, |r| tukey(n, len, r));
            config.amplitude * window * phase.sin()
        })
        .collect();
    Ok(Waveform { samples, sample_rate_hz: fs })
}

/// One block of `N` pulses: pulse `k` starts at `k * T2`, up-chirps on even
/// `k`, down-chirps on odd `k`, silence in between.
pub fn make_pulse_train(config: &PulseTrainConfig) -> Result<Waveform> {
    config.validate()?;
    let up = make_chirp(config, ChirpDirection::Up)?;
    let down = make_chirp(config, ChirpDirection::Down)?;
    let mut samples = vec![0.0; config.block_samples()];
    for k in 0..config.pulses_per_block {
        let chirp = match PulseTrainConfig::direction_of(k) {
            ChirpDirection::Up => &up,
            ChirpDirection::Down => &down,
        };
        let start = config.pulse_offset(k);
        let end = (start + chirp.len()).min(samples.len());
        samples[start..end].copy_from_slice(&chirp.samples[..end - start]);
    }
    Ok(Waveform { samples, sample_rate_hz: config.sample_rate_hz })
}

/// Peak |cross-correlation| between the up and down chirps over all lags,
/// relative to the chirp autocorrelation peak.
pub fn up_down_ratio(config: &PulseTrainConfig) -> Result<f64> {
    let up = make_chirp(config, ChirpDirection::Up)?;
    let down = make_chirp(config, ChirpDirection::Down)?;
    let n = up.len();
    let mut peak = 0.0f64;
    for shift in 0..(2 * n - 1) {
        let lag = shift as isize - (n as isize - 1);
        let lo = (-lag).max(0) as usize;
        let hi = n.min((n as isize - lag) as usize);
        let v: f64 = (lo..hi).map(|i| up.samples[(i as isize + lag) as usize] * down.samples[i]).sum();
        peak = peak.max(v.abs());
    }
    Ok(peak / up.energy())
}
