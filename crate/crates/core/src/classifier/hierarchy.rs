use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::kernel::{gram_matrix, KernelParams};
use super::lssvm::{train_from_gram, Decision, LsSvmModel};
use crate::error::{Error, Result};
use crate::features::{
    flatten_features, range_matrix, rss_vector, FeatureSet, MotionProfile, Normalization, RangeMatrix, RssVector,
    PROFILE_FRAMES,
};
use crate::rng;
use crate::simulator::GestureKind;

pub const HIERARCHY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Rss,
    Range,
}

/// Both feature sets of one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFeatures {
    pub rss: RssVector,
    pub range: RangeMatrix,
}

impl ProfileFeatures {
    /// Extracts features after fitting the profile to the standard length.
    pub fn from_profile(profile: &MotionProfile) -> Self {
        let fitted = profile.clone().fit_length(PROFILE_FRAMES);
        Self { rss: rss_vector(&fitted), range: range_matrix(&fitted) }
    }

    fn flat(&self, kind: FeatureKind, norm: Normalization) -> Vec<f64> {
        let set = match kind {
            FeatureKind::Rss => FeatureSet::Rss(&self.rss),
            FeatureKind::Range => FeatureSet::Range(&self.range),
        };
        flatten_features(set, norm).values
    }
}

/// Per-dimension affine scaling fitted on training inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(inputs: &[Vec<f64>]) -> Self {
        let n = inputs.len() as f64;
        let dim = inputs.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; dim];
        for x in inputs {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for x in inputs {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        let scale = var.into_iter().map(|s| if s > 0.0 { (s / n).sqrt() } else { 1.0 }).collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}

/// Feature handling for one group of tree nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeConfig {
    pub norm: Normalization,
    pub standardize: bool,
}

impl Default for NodeConfig {
    fn default() -> Self {
        Self { norm: Normalization::Zscore, standardize: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierarchyConfig {
    pub degree: u32,
    pub offset: f64,
    /// Kernel input scale; `None` uses `1 / dimension`.
    pub kernel_scale: Option<f64>,
    pub gamma: f64,
    /// Nodes fed by the RSS vector.
    pub rss: NodeConfig,
    /// Nodes fed by the range matrix.
    pub range: NodeConfig,
    /// Pick degree and gamma per node on a held-out slice of its training data.
    pub grid_search: bool,
    pub grid_degrees: Vec<u32>,
    pub grid_gammas: Vec<f64>,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            offset: 1.0,
            kernel_scale: None,
            gamma: 10.0,
            rss: NodeConfig { norm: Normalization::None, standardize: true },
            range: NodeConfig { norm: Normalization::Zscore, standardize: true },
            grid_search: true,
            grid_degrees: vec![2, 3],
            grid_gammas: vec![1.0, 10.0, 100.0],
            validation_fraction: 0.25,
            seed: 0,
        }
    }
}

impl HierarchyConfig {
    pub fn validate(&self) -> Result<()> {
        let kernel = KernelParams { degree: self.degree, offset: self.offset, scale: self.kernel_scale.unwrap_or(1.0) };
        kernel.validate()?;
        if !(self.gamma > 0.0) || self.grid_gammas.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::InvalidConfig("gamma values must be positive".into()));
        }
        if self.grid_search && (self.grid_degrees.is_empty() || self.grid_gammas.is_empty()) {
            return Err(Error::InvalidConfig("grid search needs at least one degree and one gamma".into()));
        }
        if self.grid_degrees.contains(&0) {
            return Err(Error::InvalidConfig("kernel degree must be at least 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidConfig("validation_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn node(&self, kind: FeatureKind) -> NodeConfig {
        match kind {
            FeatureKind::Rss => self.rss,
            FeatureKind::Range => self.range,
        }
    }
}

/// One binary node of the tree: feature encoding plus its LS-SVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeModel {
    pub feature: FeatureKind,
    pub norm: Normalization,
    pub standardizer: Option<Standardizer>,
    pub svm: LsSvmModel,
}

impl NodeModel {
    fn encode(&self, features: &ProfileFeatures) -> Vec<f64> {
        let flat = features.flat(self.feature, self.norm);
        match &self.standardizer {
            Some(s) if s.mean.len() == flat.len() => s.apply(&flat),
            _ => flat,
        }
    }

    pub fn decide(&self, features: &ProfileFeatures) -> Result<Decision> {
        self.svm.decide(&self.encode(features))
    }
}

/// Five binary LS-SVMs wired as a decision tree:
///
/// ```text
/// detect ── no gesture
///   └ pushes_vs_rest ── fwd_vs_fwdbwd ── Fwd | FwdBwd
///        └ swipes_vs_hold ── ltr_vs_rtl ── SwipeLtr | SwipeRtl
///             └ HoldHand
/// ```
///
/// The positive (+1) side of each node is the first branch listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyModel {
    pub format_version: u32,
    pub detect: NodeModel,
    pub pushes_vs_rest: NodeModel,
    pub fwd_vs_fwdbwd: NodeModel,
    pub swipes_vs_hold: NodeModel,
    pub ltr_vs_rtl: NodeModel,
}

struct NodeSpec {
    name: &'static str,
    feature: FeatureKind,
    /// `Some(+1 / -1)` for samples the node trains on.
    label: fn(GestureKind) -> Option<f64>,
    positive: GestureKind,
    negative: GestureKind,
}

fn sign(b: bool) -> f64 {
    if b {
        1.0
    } else {
        -1.0
    }
}

const NODES: [NodeSpec; 5] = [
    NodeSpec {
        name: "detect",
        feature: FeatureKind::Rss,
        label: |g| Some(sign(g != GestureKind::NoGesture)),
        positive: GestureKind::Fwd,
        negative: GestureKind::NoGesture,
    },
    NodeSpec {
        name: "pushes_vs_rest",
        feature: FeatureKind::Rss,
        label: |g| (g != GestureKind::NoGesture).then(|| sign(g.is_push())),
        positive: GestureKind::Fwd,
        negative: GestureKind::HoldHand,
    },
    NodeSpec {
        name: "fwd_vs_fwdbwd",
        feature: FeatureKind::Range,
        label: |g| g.is_push().then(|| sign(g == GestureKind::Fwd)),
        positive: GestureKind::Fwd,
        negative: GestureKind::FwdBwd,
    },
    NodeSpec {
        name: "swipes_vs_hold",
        feature: FeatureKind::Range,
        label: |g| (g.is_swipe() || g == GestureKind::HoldHand).then(|| sign(g.is_swipe())),
        positive: GestureKind::SwipeLtr,
        negative: GestureKind::HoldHand,
    },
    NodeSpec {
        name: "ltr_vs_rtl",
        feature: FeatureKind::Range,
        label: |g| g.is_swipe().then(|| sign(g == GestureKind::SwipeLtr)),
        positive: GestureKind::SwipeLtr,
        negative: GestureKind::SwipeRtl,
    },
];

impl HierarchyModel {
    pub fn train(samples: &[(&ProfileFeatures, GestureKind)], config: &HierarchyConfig) -> Result<Self> {
        config.validate()?;
        let mut nodes = Vec::with_capacity(NODES.len());
        for (idx, spec) in NODES.iter().enumerate() {
            nodes.push(train_node(spec, idx as u64, samples, config)?);
        }
        let mut it = nodes.into_iter();
        let mut next = || it.next().expect("five nodes");
        Ok(Self {
            format_version: HIERARCHY_FORMAT_VERSION,
            detect: next(),
            pushes_vs_rest: next(),
            fwd_vs_fwdbwd: next(),
            swipes_vs_hold: next(),
            ltr_vs_rtl: next(),
        })
    }

    pub fn classify(&self, features: &ProfileFeatures) -> Result<GestureKind> {
        let pos = |node: &NodeModel| node.decide(features).map(|d| d.label > 0);
        Ok(if !pos(&self.detect)? {
            GestureKind::NoGesture
        } else if pos(&self.pushes_vs_rest)? {
            if pos(&self.fwd_vs_fwdbwd)? {
                GestureKind::Fwd
            } else {
                GestureKind::FwdBwd
            }
        } else if pos(&self.swipes_vs_hold)? {
            if pos(&self.ltr_vs_rtl)? {
                GestureKind::SwipeLtr
            } else {
                GestureKind::SwipeRtl
            }
        } else {
            GestureKind::HoldHand
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        if model.format_version != HIERARCHY_FORMAT_VERSION {
            return Err(Error::MalformedData(format!(
                "model format version {} is not supported (expected {HIERARCHY_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }
}

/// Walks the tree for one profile's feature sets.
pub fn classify_gesture(h: &HierarchyModel, rss: &RssVector, rm: &RangeMatrix) -> Result<GestureKind> {
    h.classify(&ProfileFeatures { rss: rss.clone(), range: rm.clone() })
}

fn train_node(
    spec: &NodeSpec,
    node_index: u64,
    samples: &[(&ProfileFeatures, GestureKind)],
    config: &HierarchyConfig,
) -> Result<NodeModel> {
    let node_cfg = config.node(spec.feature);
    let (mut inputs, mut labels) = (Vec::new(), Vec::new());
    for (f, g) in samples {
        if let Some(y) = (spec.label)(*g) {
            inputs.push(f.flat(spec.feature, node_cfg.norm));
            labels.push(y);
        }
    }
    if !labels.contains(&1.0) {
        return Err(Error::ClassMissingFromSplit(format!("{} (node {})", spec.positive, spec.name)));
    }
    if !labels.contains(&-1.0) {
        return Err(Error::ClassMissingFromSplit(format!("{} (node {})", spec.negative, spec.name)));
    }
    let standardizer = node_cfg.standardize.then(|| Standardizer::fit(&inputs));
    if let Some(s) = &standardizer {
        inputs = inputs.iter().map(|x| s.apply(x)).collect();
    }
    let dim = inputs[0].len().max(1);
    let scale = config.kernel_scale.unwrap_or(1.0 / dim as f64);
    let gram = gram_matrix(&inputs);
    let (degree, gamma) = if config.grid_search {
        select_hyperparameters(&gram, &labels, scale, config, node_index)?
    } else {
        (config.degree, config.gamma)
    };
    let kernel = KernelParams { degree, offset: config.offset, scale };
    let svm = train_from_gram(&inputs, &gram, &labels, &kernel, gamma)?;
    Ok(NodeModel { feature: spec.feature, norm: node_cfg.norm, standardizer, svm })
}

/// Grid search over (degree, gamma) on a seeded stratified hold-out slice.
/// Ties keep the earliest grid entry.
fn select_hyperparameters(
    gram: &[f64],
    labels: &[f64],
    scale: f64,
    config: &HierarchyConfig,
    node_index: u64,
) -> Result<(u32, f64)> {
    let n = labels.len();
    let mut rng = rng::stream(config.seed, &[0x6772_6964, node_index]);
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for class in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if idx.len() < 3 {
            return Ok((config.degree, config.gamma));
        }
        idx.shuffle(&mut rng);
        let k = ((idx.len() as f64 * config.validation_fraction).round() as usize).clamp(1, idx.len() - 1);
        val.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    let m = train.len();
    let sub_gram: Vec<f64> = train.iter().flat_map(|&i| train.iter().map(move |&j| gram[i * n + j])).collect();
    let sub_labels: Vec<f64> = train.iter().map(|&i| labels[i]).collect();
    let placeholders = vec![Vec::new(); m];
    let mut best: Option<(usize, u32, f64)> = None;
    for &degree in &config.grid_degrees {
        for &gamma in &config.grid_gammas {
            let kernel = KernelParams { degree, offset: config.offset, scale };
            let Ok(model) = train_from_gram(&placeholders, &sub_gram, &sub_labels, &kernel, gamma) else {
                continue;
            };
            let errors = val
                .iter()
                .filter(|&&v| {
                    let score = train
                        .iter()
                        .zip(&model.alphas)
                        .fold(model.bias, |s, (&t, a)| s + a * kernel.apply(gram[v * n + t]));
                    sign(score >= 0.0) != labels[v]
                })
                .count();
            if best.is_none_or(|(e, _, _)| errors < e) {
                best = Some((errors, degree, gamma));
            }
        }
    }
    best.map(|(_, d, g)| (d, g)).ok_or(Error::SingularSystem)
}
