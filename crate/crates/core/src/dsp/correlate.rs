use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::frame::CorrelationFrame;
use crate::error::{Error, Result};
use crate::signal::{make_chirp, ChirpDirection, PulseTrainConfig, Waveform};

/// FFT correlator for a fixed template and input length.
///
/// Produces `values[k] = sum_n received[n + k] * template[n]` for
/// `k in 0..=input_len - template_len`.
pub struct Correlator {
    input_len: usize,
    template_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    template_conj: Vec<Complex64>,
}

impl Correlator {
    pub fn new(template: &[f64], input_len: usize) -> Result<Self> {
        if template.is_empty() || input_len < template.len() {
            return Err(Error::LengthMismatch { received: input_len, template: template.len() });
        }
        let fft_len = (input_len + template.len()).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut spectrum: Vec<Complex64> = template
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(fft_len)
            .collect();
        forward.process(&mut spectrum);
        let template_conj = spectrum.iter().map(|c| c.conj()).collect();
        Ok(Self { input_len, template_len: template.len(), forward, inverse, template_conj })
    }

    pub fn lags(&self) -> usize {
        self.input_len - self.template_len + 1
    }

    pub fn correlate(&self, received: &[f64]) -> Result<Vec<f64>> {
        if received.len() != self.input_len {
            return Err(Error::LengthMismatch { received: received.len(), template: self.template_len });
        }
        let n = self.template_conj.len();
        let mut buf: Vec<Complex64> = received
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(n)
            .collect();
        self.forward.process(&mut buf);
        for (b, t) in buf.iter_mut().zip(&self.template_conj) {
            *b *= t;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        Ok(buf[..self.lags()].iter().map(|c| c.re * scale).collect())
    }
}

/// Cross-correlation of `received` against `template` over non-negative lags.
pub fn cross_correlate(received: &Waveform, template: &Waveform) -> Result<CorrelationFrame> {
    if received.len() < template.len() || template.is_empty() {
        return Err(Error::LengthMismatch { received: received.len(), template: template.len() });
    }
    let values = Correlator::new(&template.samples, received.len())?.correlate(&received.samples)?;
    Ok(CorrelationFrame { values, block_index: 0 })
}

/// Matched filter for whole blocks: each pulse period is correlated with the
/// chirp emitted in it and the magnitudes are summed over the block.
pub struct BlockCorrelator {
    config: PulseTrainConfig,
    up: Correlator,
    down: Correlator,
}

impl BlockCorrelator {
    pub fn new(config: &PulseTrainConfig) -> Result<Self> {
        config.validate()?;
        let period = config.period_samples();
        // Each period is zero-extended so every lag in 0..period is defined.
        let padded = period + config.pulse_samples() - 1;
        let up = make_chirp(config, ChirpDirection::Up)?;
        let down = make_chirp(config, ChirpDirection::Down)?;
        Ok(Self {
            config: *config,
            up: Correlator::new(&up.samples, padded)?,
            down: Correlator::new(&down.samples, padded)?,
        })
    }

    pub fn correlate(&self, block: &Waveform, block_index: usize) -> Result<CorrelationFrame> {
        let expected = self.config.block_samples();
        if block.len() != expected {
            return Err(Error::BadBlockLength { expected, actual: block.len() });
        }
        let period = self.config.period_samples();
        let mut values = vec![0.0; period];
        let mut segment = vec![0.0; period + self.config.pulse_samples() - 1];
        for k in 0..self.config.pulses_per_block {
            let start = self.config.pulse_offset(k);
            let end = (start + period).min(block.len());
            segment.fill(0.0);
            segment[..end - start].copy_from_slice(&block.samples[start..end]);
            let correlator = match PulseTrainConfig::direction_of(k) {
                ChirpDirection::Up => &self.up,
                ChirpDirection::Down => &self.down,
            };
            for (acc, v) in values.iter_mut().zip(correlator.correlate(&segment)?) {
                *acc += v.abs();
            }
        }
        Ok(CorrelationFrame { values, block_index })
    }
}

/// One-shot form of [`BlockCorrelator::correlate`].
pub fn block_correlate(block: &Waveform, config: &PulseTrainConfig) -> Result<CorrelationFrame> {
    BlockCorrelator::new(config)?.correlate(block, 0)
}
