//! Per-profile feature sets: the RSS vector (summed top-peak heights per
//! frame) and the range matrix (top-peak lags and heights per frame).

use serde::{Deserialize, Serialize};

use crate::dsp::MotionFrame;
use crate::simulator::GestureKind;

pub const PEAKS_PER_FRAME: usize = 20;
pub const PROFILE_FRAMES: usize = 100;

/// Consecutive motion frames covering one gesture window.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionProfile {
    pub frames: Vec<MotionFrame>,
    pub label: Option<GestureKind>,
}

impl MotionProfile {
    pub fn new(frames: Vec<MotionFrame>, label: Option<GestureKind>) -> Self {
        Self { frames, label }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_len(&self) -> usize {
        self.frames.first().map_or(0, MotionFrame::len)
    }

    /// Center-crops or zero-pads to exactly `target` frames.
    pub fn fit_length(mut self, target: usize) -> Self {
        let len = self.frames.len();
        if len > target {
            let skip = (len - target) / 2;
            self.frames.drain(..skip);
            self.frames.truncate(target);
        } else if len < target {
            let Some(first) = self.frames.first() else { return self };
            let blank = MotionFrame::zeros(first.len(), first.gate);
            let before = (target - len) / 2;
            let mut frames = vec![blank.clone(); before];
            frames.append(&mut self.frames);
            frames.resize(target, blank);
            self.frames = frames;
        }
        self
    }

    pub fn reversed(&self) -> Self {
        Self { frames: self.frames.iter().rev().cloned().collect(), label: self.label }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { frames: self.frames.iter().map(|f| f.scaled(s)).collect(), label: self.label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub lag_index: usize,
    pub value: f64,
}

impl Peak {
    pub const EMPTY: Peak = Peak { lag_index: 0, value: 0.0 };
}

/// Up to `k` in-gate local maxima of `frame`, strongest first.
///
/// A peak is a positive sample strictly above both neighbours; a flat top
/// counts once, at its leftmost index. Equal heights order by smaller lag.
pub fn find_peaks(frame: &MotionFrame, k: usize) -> Vec<Peak> {
    let v = &frame.values;
    let span = frame.gate.span(v.len());
    let mut peaks = Vec::new();
    let mut i = span.start;
    while i < span.end {
        let x = v[i];
        let left = if i == 0 { 0.0 } else { v[i - 1] };
        if x > 0.0 && left < x {
            let mut j = i;
            while j + 1 < span.end && v[j + 1] == x {
                j += 1;
            }
            let right = v.get(j + 1).copied().unwrap_or(0.0);
            if right < x {
                peaks.push(Peak { lag_index: i, value: x });
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.lag_index.cmp(&b.lag_index)));
    peaks.truncate(k);
    peaks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RssVector {
    pub values: Vec<f64>,
}

/// Sum of the top peak heights in every frame.
pub fn rss_vector(profile: &MotionProfile) -> RssVector {
    rss_vector_with(profile, PEAKS_PER_FRAME)
}

pub fn rss_vector_with(profile: &MotionProfile, k: usize) -> RssVector {
    let values = profile.frames.iter().map(|f| find_peaks(f, k).iter().map(|p| p.value).sum()).collect();
    RssVector { values }
}

/// `rows[i]` holds the top `k` peaks of frame `i`, padded with [`Peak::EMPTY`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeMatrix {
    pub rows: Vec<Vec<Peak>>,
    pub k: usize,
    pub frame_len: usize,
}

pub fn range_matrix(profile: &MotionProfile) -> RangeMatrix {
    range_matrix_with(profile, PEAKS_PER_FRAME)
}

pub fn range_matrix_with(profile: &MotionProfile, k: usize) -> RangeMatrix {
    let rows = profile
        .frames
        .iter()
        .map(|f| {
            let mut row = find_peaks(f, k);
            row.resize(k, Peak::EMPTY);
            row
        })
        .collect();
    RangeMatrix { rows, k, frame_len: profile.frame_len() }
}

impl RangeMatrix {
    /// Lag of the strongest peak per frame; `None` for peakless frames.
    pub fn dominant_lags(&self) -> Vec<Option<usize>> {
        self.rows.iter().map(|r| r.first().filter(|p| p.value > 0.0).map(|p| p.lag_index)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    Max,
    #[default]
    Zscore,
}

pub enum FeatureSet<'a> {
    Rss(&'a RssVector),
    Range(&'a RangeMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatFeatures {
    pub values: Vec<f64>,
    /// Set when the normalizer had nothing to scale by and returned zeros.
    pub degenerate: bool,
}

/// Flattens a feature set into a classifier input vector.
///
/// Range matrices flatten row by row as `(lag / frame_len, value / max)`
/// pairs, giving `2 * L * K` entries.
pub fn flatten_features(x: FeatureSet<'_>, norm: Normalization) -> FlatFeatures {
    let raw = match x {
        FeatureSet::Rss(r) => r.values.clone(),
        FeatureSet::Range(m) => {
            let max = m.rows.iter().flatten().fold(0.0f64, |a, p| a.max(p.value));
            let lag_scale = if m.frame_len > 0 { 1.0 / m.frame_len as f64 } else { 0.0 };
            let value_scale = if max > 0.0 { 1.0 / max } else { 0.0 };
            m.rows.iter().flatten().flat_map(|p| [p.lag_index as f64 * lag_scale, p.value * value_scale]).collect()
        }
    };
    normalize(raw, norm)
}

fn normalize(mut v: Vec<f64>, norm: Normalization) -> FlatFeatures {
    let zeroed = |mut v: Vec<f64>| {
        v.fill(0.0);
        FlatFeatures { values: v, degenerate: true }
    };
    match norm {
        Normalization::None => FlatFeatures { values: v, degenerate: false },
        Normalization::Max => {
            let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if max == 0.0 {
                return zeroed(v);
            }
            v.iter_mut().for_each(|x| *x /= max);
            FlatFeatures { values: v, degenerate: false }
        }
        Normalization::Zscore => {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            if !(var > 0.0) {
                return zeroed(v);
            }
            let sd = var.sqrt();
            v.iter_mut().for_each(|x| *x = (*x - mean) / sd);
            FlatFeatures { values: v, degenerate: false }
        }
    }
}
