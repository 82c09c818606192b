use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::ProfileFeatures;
use crate::dsp::{DspConfig, MotionPipeline};
use crate::error::{Error, Result};
use crate::features::MotionProfile;
use crate::rng;
use crate::signal::{make_chirp, ChirpDirection, PulseTrainConfig};
use crate::simulator::{simulate_gesture, GestureKind, JitterRanges, MultipathTap, Scene, StaticReflector, Trajectory};

/// Fixed scene ingredients shared by every rendered example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneTemplate {
    pub reflection_coeff: f64,
    pub tx_rx_baseline_m: f64,
    pub self_interference_gain: f64,
    pub static_clutter: Vec<StaticReflector>,
    pub multipath: Vec<MultipathTap>,
    pub speed_of_sound_mps: f64,
}

impl Default for SceneTemplate {
    fn default() -> Self {
        Self {
            reflection_coeff: 0.01,
            tx_rx_baseline_m: 0.011,
            self_interference_gain: 1.0,
            static_clutter: vec![
                StaticReflector { range_m: 0.45, gain: 0.05 },
                StaticReflector { range_m: 0.70, gain: 0.08 },
            ],
            multipath: vec![MultipathTap { extra_delay_s: 0.0006, gain: 0.25 }],
            speed_of_sound_mps: 343.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub repetitions_per_gesture: usize,
    pub include_no_gesture: bool,
    /// Defaults to `repetitions_per_gesture`.
    pub no_gesture_repetitions: Option<usize>,
    pub noise_std: f64,
    pub duration_s: f64,
    pub jitter: JitterRanges,
    pub scene: SceneTemplate,
    pub master_seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            repetitions_per_gesture: 120,
            include_no_gesture: true,
            no_gesture_repetitions: None,
            // 15 dB single-pulse matched-filter SNR at 0.30 m for the default
            // scene; see `noise_std_for_snr`.
            noise_std: 0.137,
            duration_s: 2.0,
            jitter: JitterRanges::default(),
            scene: SceneTemplate::default(),
            master_seed: 20_170_305,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions_per_gesture == 0 {
            return Err(Error::InvalidConfig("repetitions_per_gesture must be at least 1".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidConfig("noise_std must be a non-negative number".into()));
        }
        Ok(())
    }

    /// `(gesture, repetition)` for every example, gestures first.
    pub fn items(&self) -> Vec<(GestureKind, usize)> {
        let mut items: Vec<_> = GestureKind::GESTURES
            .iter()
            .flat_map(|&g| (0..self.repetitions_per_gesture).map(move |r| (g, r)))
            .collect();
        if self.include_no_gesture {
            let reps = self.no_gesture_repetitions.unwrap_or(self.repetitions_per_gesture);
            items.extend((0..reps).map(|r| (GestureKind::NoGesture, r)));
        }
        items
    }

    pub fn item_seed(&self, gesture: GestureKind, repetition: usize) -> u64 {
        let class = GestureKind::ALL.iter().position(|&g| g == gesture).unwrap_or(0) as u64;
        rng::derive_seed(self.master_seed, &[class, repetition as u64])
    }
}

/// Noise level giving `snr_db` between the single-pulse matched-filter peak
/// of a hand at `range_m` and the filtered noise RMS.
pub fn noise_std_for_snr(pulse: &PulseTrainConfig, template: &SceneTemplate, range_m: f64, snr_db: f64) -> Result<f64> {
    let energy = make_chirp(pulse, ChirpDirection::Up)?.energy();
    let alpha = template.reflection_coeff / (range_m * range_m);
    Ok(alpha * energy.sqrt() / 10f64.powf(snr_db / 20.0))
}

/// Randomized scene for one example; fully determined by `seed`.
pub fn scene_for(spec: &DatasetSpec, gesture: GestureKind, seed: u64) -> Scene {
    let mut traj_rng = rng::stream(seed, &[0]);
    let trajectory = Trajectory::randomized(gesture, spec.duration_s, &spec.jitter, &mut traj_rng);
    let t = &spec.scene;
    Scene {
        trajectory,
        reflection_coeff: t.reflection_coeff * spec.jitter.reflection_scale.sample(&mut traj_rng),
        tx_rx_baseline_m: t.tx_rx_baseline_m,
        self_interference_gain: t.self_interference_gain,
        static_clutter: t.static_clutter.clone(),
        multipath: t.multipath.clone(),
        sub_reflectors: Vec::new(),
        noise_std: spec.noise_std,
        speed_of_sound_mps: t.speed_of_sound_mps,
        rng_seed: rng::derive_seed(seed, &[1]),
    }
}

/// Renders a scene and runs it through matched filtering and de-cluttering.
pub fn render_profile(scene: &Scene, pulse: &PulseTrainConfig, dsp: &DspConfig) -> Result<MotionProfile> {
    let blocks = simulate_gesture(scene, pulse)?;
    let frames = MotionPipeline::run(pulse, dsp, &blocks)?;
    Ok(MotionProfile::new(frames, Some(scene.trajectory.gesture)))
}

#[derive(Debug, Clone)]
pub struct DatasetItem {
    pub index: usize,
    pub gesture: GestureKind,
    pub seed: u64,
    pub scene: Scene,
    pub profile: MotionProfile,
}

/// Renders every example in parallel and maps it through `sink`; results
/// come back in item order.
pub fn build_dataset_with<T, F>(
    spec: &DatasetSpec,
    pulse: &PulseTrainConfig,
    dsp: &DspConfig,
    sink: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(DatasetItem) -> Result<T> + Sync,
{
    spec.validate()?;
    pulse.validate()?;
    dsp.validate(pulse)?;
    spec.items()
        .into_par_iter()
        .enumerate()
        .map(|(index, (gesture, rep))| {
            let seed = spec.item_seed(gesture, rep);
            let scene = scene_for(spec, gesture, seed);
            let profile = render_profile(&scene, pulse, dsp)?;
            sink(DatasetItem { index, gesture, seed, scene, profile })
        })
        .collect()
}

/// Labelled motion profiles for every example.
pub fn build_dataset(
    spec: &DatasetSpec,
    pulse: &PulseTrainConfig,
    dsp: &DspConfig,
) -> Result<Vec<(MotionProfile, GestureKind)>> {
    build_dataset_with(spec, pulse, dsp, |item| Ok((item.profile, item.gesture)))
}

/// Labelled feature sets for every example, without retaining the frames.
pub fn build_features(
    spec: &DatasetSpec,
    pulse: &PulseTrainConfig,
    dsp: &DspConfig,
) -> Result<Vec<(ProfileFeatures, GestureKind)>> {
    build_dataset_with(spec, pulse, dsp, |item| Ok((ProfileFeatures::from_profile(&item.profile), item.gesture)))
}
