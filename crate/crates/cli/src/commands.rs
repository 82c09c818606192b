//! Subcommand implementations. Each one computes everything in memory
//! first and writes its files only once the whole run has succeeded.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use echogest_core::dsp::{Gate, MotionPipeline};
use echogest_core::eval::{
    build_dataset_with, build_features, cross_validate, evaluate, scene_for, write_report, ConfusionMatrix,
    DetectionStats,
};
use echogest_core::io::{
    read_frame_stack, read_wav, write_feature_rows, write_frame_stack, write_frames_csv, write_wav,
};
use echogest_core::simulator::simulate_gesture;
use echogest_core::{
    Error as CoreError, GestureKind, HierarchyModel, MotionFrame, MotionProfile, ProfileFeatures, Scene, Waveform,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const WAV_FILE: &str = "gesture.wav";
pub const SYNTH_META_FILE: &str = "gesture.json";
pub const FRAME_STACK_FILE: &str = "frames.mfs";
pub const FRAMES_CSV_FILE: &str = "frames.csv";
pub const FEATURES_CSV_FILE: &str = "features.csv";
pub const PREDICTION_FILE: &str = "prediction.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FEATURES_JSONL_FILE: &str = "features.jsonl";
pub const MODEL_FILE: &str = "model.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthMetadata {
    pub gesture: GestureKind,
    pub seed: u64,
    pub sample_rate_hz: f64,
    pub samples: usize,
    pub blocks: usize,
    pub scene: Scene,
}

/// Renders one gesture recording to `gesture.wav` plus a JSON sidecar.
pub fn synth(cfg: &RunConfig, out: &Path) -> CliResult<SynthMetadata> {
    let scene = scene_for(&cfg.dataset, cfg.synth.gesture, cfg.synth.seed);
    let blocks = simulate_gesture(&scene, &cfg.pulse)?;
    let samples: Vec<f64> = blocks.iter().flat_map(|b| b.samples.iter().copied()).collect();
    let wave = Waveform::new(samples, cfg.pulse.sample_rate_hz)?;
    let meta = SynthMetadata {
        gesture: cfg.synth.gesture,
        seed: cfg.synth.seed,
        sample_rate_hz: cfg.pulse.sample_rate_hz,
        samples: wave.len(),
        blocks: blocks.len(),
        scene,
    };

    cfg.write_snapshot(out)?;
    write_wav(&out.join(WAV_FILE), &wave, cfg.output.wav_format)?;
    fs::write(out.join(SYNTH_META_FILE), serde_json::to_string_pretty(&meta).map_err(CoreError::from)?)?;
    Ok(meta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSummary {
    pub frames: Vec<MotionFrame>,
    pub features: ProfileFeatures,
    pub prediction: Option<GestureKind>,
    pub dropped_samples: usize,
}

/// Runs a recording through matched filtering and de-cluttering and writes
/// the motion-frame stack and feature tables.
pub fn process(cfg: &RunConfig, input: &Path, model: Option<&Path>, out: &Path) -> CliResult<ProcessSummary> {
    let wave = read_wav(input).map_err(|e| CliError::input(input, e))?;
    let expected = cfg.pulse.sample_rate_hz.round() as u32;
    let actual = wave.sample_rate_hz.round() as u32;
    if expected != actual {
        return Err(CliError::input(input, CoreError::SampleRateMismatch { expected, actual }));
    }
    let model = model.map(|p| HierarchyModel::load(p).map_err(|e| CliError::input(p, e))).transpose()?;

    let block_len = cfg.pulse.block_samples();
    let count = wave.len() / block_len;
    if count == 0 {
        return Err(CliError::Data(format!(
            "{}: {} samples is shorter than one {block_len}-sample block",
            input.display(),
            wave.len()
        )));
    }
    let blocks: Vec<Waveform> = wave.samples[..count * block_len]
        .chunks_exact(block_len)
        .map(|c| Waveform::new(c.to_vec(), wave.sample_rate_hz))
        .collect::<echogest_core::Result<_>>()?;
    let frames = MotionPipeline::run(&cfg.pulse, &cfg.dsp, &blocks)?;
    let features = ProfileFeatures::from_profile(&MotionProfile::new(frames.clone(), None));
    let prediction = model.as_ref().map(|m| m.classify(&features)).transpose()?;

    cfg.write_snapshot(out)?;
    write_frame_stack(&out.join(FRAME_STACK_FILE), &frames, cfg.pulse.sample_rate_hz)?;
    write_frames_csv(&out.join(FRAMES_CSV_FILE), &frames, cfg.pulse.sample_rate_hz)?;
    let lags: Vec<f64> = features.range.rows.iter().flatten().map(|p| p.lag_index as f64).collect();
    let values: Vec<f64> = features.range.rows.iter().flatten().map(|p| p.value).collect();
    write_feature_rows(
        &out.join(FEATURES_CSV_FILE),
        [("rss", &features.rss.values[..]), ("range_lag", &lags[..]), ("range_value", &values[..])],
    )?;
    if let Some(g) = prediction {
        let doc = serde_json::json!({ "gesture": g, "label": g.label() });
        fs::write(out.join(PREDICTION_FILE), serde_json::to_string_pretty(&doc).map_err(CoreError::from)?)?;
    }
    Ok(ProcessSummary { frames, features, prediction, dropped_samples: wave.len() - count * block_len })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestItem {
    pub index: usize,
    pub gesture: GestureKind,
    pub seed: u64,
    /// Frame-stack file relative to the manifest, when frames were kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub sample_rate_hz: f64,
    pub frame_len: usize,
    pub gate: Gate,
    /// JSON-lines file of per-item features, relative to the manifest.
    pub features_file: String,
    pub items: Vec<ManifestItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureRecord {
    index: usize,
    gesture: GestureKind,
    features: ProfileFeatures,
}

/// Renders the configured dataset and writes its manifest and features.
pub fn dataset(cfg: &RunConfig, out: &Path) -> CliResult<DatasetManifest> {
    let keep_frames = cfg.output.dataset_frames;
    let rendered = build_dataset_with(&cfg.dataset, &cfg.pulse, &cfg.dsp, |item| {
        let features = ProfileFeatures::from_profile(&item.profile);
        let frames = keep_frames.then(|| item.profile.frames.clone());
        Ok((ManifestItem { index: item.index, gesture: item.gesture, seed: item.seed, frames: None }, features, frames))
    })?;

    cfg.write_snapshot(out)?;
    let mut items = Vec::with_capacity(rendered.len());
    let mut w = BufWriter::new(File::create(out.join(FEATURES_JSONL_FILE))?);
    if keep_frames {
        fs::create_dir_all(out.join("profiles"))?;
    }
    for (mut item, features, frames) in rendered {
        if let Some(frames) = frames {
            let rel = format!("profiles/{:05}_{}.mfs", item.index, item.gesture.key());
            write_frame_stack(&out.join(&rel), &frames, cfg.pulse.sample_rate_hz)?;
            item.frames = Some(rel);
        }
        let rec = FeatureRecord { index: item.index, gesture: item.gesture, features };
        serde_json::to_writer(&mut w, &rec).map_err(CoreError::from)?;
        w.write_all(b"\n")?;
        items.push(item);
    }
    w.flush()?;

    let manifest = DatasetManifest {
        format_version: MANIFEST_FORMAT_VERSION,
        sample_rate_hz: cfg.pulse.sample_rate_hz,
        frame_len: cfg.pulse.period_samples(),
        gate: cfg.dsp.gate(&cfg.pulse),
        features_file: FEATURES_JSONL_FILE.to_string(),
        items,
    };
    fs::write(out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest).map_err(CoreError::from)?)?;
    Ok(manifest)
}

/// Loads labelled features from a dataset manifest. Items without a
/// feature record are recomputed from their frame stack.
pub fn load_dataset(manifest_path: &Path) -> CliResult<Vec<(ProfileFeatures, GestureKind)>> {
    let bad = |msg: String| CliError::Data(format!("{}: {msg}", manifest_path.display()));
    let text = fs::read_to_string(manifest_path).map_err(|e| CliError::input(manifest_path, e.into()))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| CliError::input(manifest_path, e.into()))?;
    if manifest.format_version != MANIFEST_FORMAT_VERSION {
        return Err(bad(format!("unsupported manifest version {}", manifest.format_version)));
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let mut records = BTreeMap::new();
    let feat_path = base.join(&manifest.features_file);
    if feat_path.exists() {
        let reader = BufReader::new(File::open(&feat_path)?);
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: FeatureRecord = serde_json::from_str(&line)
                .map_err(|e| CliError::Data(format!("{} line {}: {e}", feat_path.display(), n + 1)))?;
            records.insert(rec.index, rec);
        }
    }

    manifest
        .items
        .iter()
        .map(|item| match (records.remove(&item.index), &item.frames) {
            (Some(rec), _) if rec.gesture == item.gesture => Ok((rec.features, item.gesture)),
            (Some(rec), _) => {
                Err(bad(format!("item {} labelled {} but features say {}", item.index, item.gesture, rec.gesture)))
            }
            (None, Some(rel)) => {
                let path = base.join(rel);
                let (_, frames) = read_frame_stack(&path, manifest.gate).map_err(|e| CliError::input(&path, e))?;
                let profile = MotionProfile::new(frames, Some(item.gesture));
                Ok((ProfileFeatures::from_profile(&profile), item.gesture))
            }
            (None, None) => Err(bad(format!("item {} has neither features nor frames", item.index))),
        })
        .collect()
}

fn dataset_or_render(cfg: &RunConfig, manifest: Option<&Path>) -> CliResult<Vec<(ProfileFeatures, GestureKind)>> {
    match manifest {
        Some(p) => load_dataset(p),
        None => Ok(build_features(&cfg.dataset, &cfg.pulse, &cfg.dsp)?),
    }
}

fn as_refs(data: &[(ProfileFeatures, GestureKind)]) -> Vec<(&ProfileFeatures, GestureKind)> {
    data.iter().map(|(f, g)| (f, *g)).collect()
}

/// Trains the classifier tree on every example and saves it.
pub fn train(cfg: &RunConfig, manifest: Option<&Path>, out: &Path) -> CliResult<HierarchyModel> {
    let data = dataset_or_render(cfg, manifest)?;
    let model = HierarchyModel::train(&as_refs(&data), &cfg.classifier)?;
    cfg.write_snapshot(out)?;
    model.save(&out.join(MODEL_FILE))?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub confusion: ConfusionMatrix,
    pub detection: DetectionStats,
    /// Cross-validation folds; zero when a fixed model was scored.
    pub folds: usize,
    pub files: Vec<PathBuf>,
}

/// Scores a saved model on the dataset, or cross-validates the configured
/// classifier when no model is given.
pub fn eval(cfg: &RunConfig, manifest: Option<&Path>, model: Option<&Path>, out: &Path) -> CliResult<EvalSummary> {
    let model = model.map(|p| HierarchyModel::load(p).map_err(|e| CliError::input(p, e))).transpose()?;
    let data = dataset_or_render(cfg, manifest)?;
    let (confusion, detection, folds) = match &model {
        Some(m) => {
            let (cm, det) = evaluate(m, &as_refs(&data))?;
            (cm, det, 0)
        }
        None => {
            let r = cross_validate(&data, &cfg.classifier, &cfg.eval)?;
            (r.confusion, r.detection, r.folds)
        }
    };
    cfg.write_snapshot(out)?;
    let files = write_report(&confusion, Some(&detection), out)?;
    Ok(EvalSummary { confusion, detection, folds, files })
}

/// Regenerates the report files from a directory holding
/// `confusion_counts.csv` and, optionally, `metrics.json`.
pub fn report(input: &Path, out: &Path) -> CliResult<(ConfusionMatrix, Option<DetectionStats>)> {
    let counts = input.join("confusion_counts.csv");
    let cm = ConfusionMatrix::read_counts_csv(&counts).map_err(|e| CliError::input(&counts, e))?;
    let metrics = input.join("metrics.json");
    let detection = if metrics.exists() {
        let text = fs::read_to_string(&metrics)?;
        let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::input(&metrics, e.into()))?;
        match doc.get("detection") {
            Some(v) if !v.is_null() => {
                Some(serde_json::from_value(v.clone()).map_err(|e| CliError::input(&metrics, e.into()))?)
            }
            _ => None,
        }
    } else {
        None
    };
    write_report(&cm, detection.as_ref(), out)?;
    Ok((cm, detection))
}
