//! Matched filtering, clutter removal and motion-frame extraction.

mod correlate;
mod declutter;
mod frame;

use serde::{Deserialize, Serialize};

pub use correlate::{block_correlate, cross_correlate, BlockCorrelator, Correlator};
pub use declutter::DeclutterState;
pub use frame::{estimate_tof_rss, CorrelationFrame, Gate, MotionFrame, RangeEstimate};

use crate::error::{Error, Result};
use crate::signal::{PulseTrainConfig, Waveform};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DspConfig {
    /// Forgetting factor `c` of the background estimate.
    pub clutter_factor: f64,
    pub gate_min_s: f64,
    pub gate_max_s: f64,
    pub speed_of_sound_mps: f64,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            clutter_factor: 0.8,
            gate_min_s: 0.0005,
            gate_max_s: 0.0035,
            speed_of_sound_mps: crate::simulator::scene_default_speed_of_sound(),
        }
    }
}

impl DspConfig {
    pub fn validate(&self, pulse: &PulseTrainConfig) -> Result<()> {
        if !(0.0..=1.0).contains(&self.clutter_factor) {
            return Err(Error::InvalidClutterFactor(self.clutter_factor));
        }
        if !(self.gate_min_s >= 0.0 && self.gate_min_s < self.gate_max_s && self.gate_max_s < pulse.pulse_period_s) {
            return Err(Error::InvalidConfig(format!(
                "range gate [{}, {}] s must be ordered and inside the pulse period",
                self.gate_min_s, self.gate_max_s
            )));
        }
        if !(self.speed_of_sound_mps > 0.0) {
            return Err(Error::InvalidConfig("speed of sound must be positive".into()));
        }
        Ok(())
    }

    pub fn gate(&self, pulse: &PulseTrainConfig) -> Gate {
        Gate::from_seconds(self.gate_min_s, self.gate_max_s, pulse.sample_rate_hz)
    }
}

/// Streaming block -> motion frame processor for one recording.
pub struct MotionPipeline {
    correlator: BlockCorrelator,
    declutter: DeclutterState,
}

impl MotionPipeline {
    pub fn new(pulse: &PulseTrainConfig, dsp: &DspConfig) -> Result<Self> {
        dsp.validate(pulse)?;
        Ok(Self {
            correlator: BlockCorrelator::new(pulse)?,
            declutter: DeclutterState::new(dsp.clutter_factor, dsp.gate(pulse))?,
        })
    }

    pub fn push(&mut self, block: &Waveform, block_index: usize) -> Result<MotionFrame> {
        let frame = self.correlator.correlate(block, block_index)?;
        self.declutter.declutter(&frame)
    }

    /// Processes a whole recording given as consecutive blocks.
    pub fn run(pulse: &PulseTrainConfig, dsp: &DspConfig, blocks: &[Waveform]) -> Result<Vec<MotionFrame>> {
        let mut pipeline = Self::new(pulse, dsp)?;
        blocks.iter().enumerate().map(|(i, b)| pipeline.push(b, i)).collect()
    }
}
