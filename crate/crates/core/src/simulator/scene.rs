use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::trajectory::{Position, Trajectory};
use crate::error::{Error, Result};
use crate::rng;
use crate::signal::{PulseTrainConfig, Waveform};

/// Fixed reflector (furniture, walls) at a given on-axis range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticReflector {
    pub range_m: f64,
    pub gain: f64,
}

/// Delayed copy of the hand echo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultipathTap {
    pub extra_delay_s: f64,
    pub gain: f64,
}

/// Secondary scatterer rigidly attached to the hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubReflector {
    pub depth_offset_m: f64,
    pub lateral_offset_m: f64,
    pub relative_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub trajectory: Trajectory,
    /// Hand echo amplitude is `reflection_coeff / r^2`.
    pub reflection_coeff: f64,
    #[serde(default = "default_baseline")]
    pub tx_rx_baseline_m: f64,
    #[serde(default)]
    pub self_interference_gain: f64,
    #[serde(default)]
    pub static_clutter: Vec<StaticReflector>,
    #[serde(default)]
    pub multipath: Vec<MultipathTap>,
    #[serde(default)]
    pub sub_reflectors: Vec<SubReflector>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound_mps: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_baseline() -> f64 {
    0.011
}

pub(crate) fn default_speed_of_sound() -> f64 {
    343.0
}

/// Round-trip time of flight from the transmitter to `position` and back to
/// the receiver. Transmitter and receiver sit at `-baseline/2` and
/// `+baseline/2` on the lateral axis.
pub fn range_to_delay(position: Position, baseline_m: f64, c_mps: f64) -> f64 {
    let half = baseline_m / 2.0;
    let to_tx = position.depth_m.hypot(position.lateral_m + half);
    let to_rx = position.depth_m.hypot(position.lateral_m - half);
    (to_tx + to_rx) / c_mps
}

impl Scene {
    /// Scene with only a hand reflector: no clutter, leakage or noise.
    pub fn clean(trajectory: Trajectory, reflection_coeff: f64) -> Self {
        Self {
            trajectory,
            reflection_coeff,
            tx_rx_baseline_m: default_baseline(),
            self_interference_gain: 0.0,
            static_clutter: Vec::new(),
            multipath: Vec::new(),
            sub_reflectors: Vec::new(),
            noise_std: 0.0,
            speed_of_sound_mps: default_speed_of_sound(),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.trajectory.validate()?;
        let gains = [self.reflection_coeff, self.self_interference_gain, self.noise_std]
            .into_iter()
            .chain(self.static_clutter.iter().map(|s| s.gain))
            .chain(self.multipath.iter().map(|m| m.gain))
            .chain(self.sub_reflectors.iter().map(|s| s.relative_gain));
        for g in gains {
            if !g.is_finite() {
                return Err(Error::InvalidConfig("scene gains must be finite".into()));
            }
        }
        if self.noise_std < 0.0 {
            return Err(Error::InvalidConfig("noise_std must be non-negative".into()));
        }
        if !(self.speed_of_sound_mps > 0.0) || self.tx_rx_baseline_m < 0.0 {
            return Err(Error::InvalidConfig("speed of sound and baseline must be positive".into()));
        }
        if self.multipath.iter().any(|m| m.extra_delay_s < 0.0 || !m.extra_delay_s.is_finite())
            || self.static_clutter.iter().any(|s| !(s.range_m > 0.0))
        {
            return Err(Error::InvalidConfig("delays and ranges must be non-negative".into()));
        }
        Ok(())
    }

    /// One-way-averaged distance `r` used by the spreading law.
    fn echo_amplitude(&self, position: Position) -> f64 {
        let r =
            range_to_delay(position, self.tx_rx_baseline_m, self.speed_of_sound_mps) * self.speed_of_sound_mps / 2.0;
        self.reflection_coeff / (r * r)
    }

    /// Every echo path for a pulse emitted at `t` seconds, as (delay, gain).
    fn echo_paths(&self, t: f64) -> Vec<(f64, f64)> {
        let c = self.speed_of_sound_mps;
        let baseline = self.tx_rx_baseline_m;
        let mut paths = Vec::new();
        if self.self_interference_gain != 0.0 {
            paths.push((baseline / c, self.self_interference_gain));
        }
        for s in &self.static_clutter {
            paths.push((range_to_delay(Position::new(s.range_m, 0.0), baseline, c), s.gain));
        }
        if let Some(hand) = self.trajectory.position_at(t) {
            let mut reflectors = vec![(hand, 1.0)];
            reflectors.extend(self.sub_reflectors.iter().map(|s| {
                let p = Position::new(hand.depth_m + s.depth_offset_m, hand.lateral_m + s.lateral_offset_m);
                (p, s.relative_gain)
            }));
            for (p, rel) in reflectors {
                let delay = range_to_delay(p, baseline, c);
                let gain = rel * self.echo_amplitude(p);
                paths.push((delay, gain));
                for m in &self.multipath {
                    paths.push((delay + m.extra_delay_s, gain * m.gain));
                }
            }
        }
        paths
    }
}

/// Renders the received block `block_index` for the transmitted block
/// `tx_block`: every pulse is echoed along each path at an integer-sample
/// delay, then white Gaussian noise is added.
pub fn simulate_block(
    scene: &Scene,
    tx_block: &Waveform,
    block_index: usize,
    config: &PulseTrainConfig,
) -> Result<Waveform> {
    if tx_block.len() != config.block_samples() {
        return Err(Error::BadBlockLength { expected: config.block_samples(), actual: tx_block.len() });
    }
    let fs = config.sample_rate_hz;
    let pulse_len = config.pulse_samples();
    let mut out = vec![0.0; tx_block.len()];
    for k in 0..config.pulses_per_block {
        let offset = config.pulse_offset(k);
        let pulse = &tx_block.samples[offset..(offset + pulse_len).min(tx_block.len())];
        let emitted_at = block_index as f64 * config.block_len_s() + k as f64 * config.pulse_period_s;
        for (delay_s, gain) in scene.echo_paths(emitted_at) {
            if delay_s >= config.pulse_period_s {
                return Err(Error::DelayExceedsFrame { delay_s, period_s: config.pulse_period_s });
            }
            let start = offset + (delay_s * fs).round() as usize;
            for (dst, src) in out.iter_mut().skip(start).zip(pulse) {
                *dst += gain * src;
            }
        }
    }
    if scene.noise_std > 0.0 {
        let mut rng = rng::stream(scene.rng_seed, &[block_index as u64]);
        let normal = Normal::new(0.0, scene.noise_std).map_err(|e| Error::InvalidConfig(format!("noise: {e}")))?;
        for v in out.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(Waveform { samples: out, sample_rate_hz: fs })
}

/// Renders every block of the gesture window.
pub fn simulate_gesture(scene: &Scene, config: &PulseTrainConfig) -> Result<Vec<Waveform>> {
    scene.validate()?;
    let tx = crate::signal::make_pulse_train(config)?;
    let blocks = scene.trajectory.duration_s / config.block_len_s();
    let count = blocks.round();
    if count < 1.0 || (blocks - count).abs() > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "duration {} s is not a whole number of {} s blocks",
            scene.trajectory.duration_s,
            config.block_len_s()
        )));
    }
    (0..count as usize).map(|b| simulate_block(scene, &tx, b, config)).collect()
}
