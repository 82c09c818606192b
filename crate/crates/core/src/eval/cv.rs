use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::ConfusionMatrix;
use crate::classifier::{HierarchyConfig, HierarchyModel, ProfileFeatures};
use crate::error::{Error, Result};
use crate::rng;
use crate::simulator::GestureKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMode {
    /// One stratified hold-out split.
    Single,
    /// `folds` independent stratified hold-out splits.
    #[default]
    Repeated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub test_fraction: f64,
    pub folds: usize,
    pub mode: CvMode,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { test_fraction: 0.08, folds: 12, mode: CvMode::Repeated, seed: 0 }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!("test_fraction {} outside (0, 1)", self.test_fraction)));
        }
        if self.folds == 0 {
            return Err(Error::InvalidConfig("folds must be at least 1".into()));
        }
        Ok(())
    }

    pub fn effective_folds(&self) -> usize {
        match self.mode {
            CvMode::Single => 1,
            CvMode::Repeated => self.folds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class seeded shuffle; the first `round(test_fraction * n_class)`
/// indices of each class (at least 1, at most `n_class - 1`) go to test.
pub fn stratified_split(labels: &[GestureKind], test_fraction: f64, seed: u64, fold: usize) -> Result<Split> {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (class_idx, class) in GestureKind::ALL.iter().enumerate() {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == *class).collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::ClassMissingFromSplit(class.to_string()));
        }
        let mut rng = rng::stream(seed, &[fold as u64, class_idx as u64]);
        idx.shuffle(&mut rng);
        let k = ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1);
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

pub trait Predictor {
    fn predict(&self, features: &ProfileFeatures) -> Result<GestureKind>;
}

pub trait Trainer: Sync {
    type Model: Predictor;
    fn train(&self, samples: &[(&ProfileFeatures, GestureKind)]) -> Result<Self::Model>;
}

impl Predictor for HierarchyModel {
    fn predict(&self, features: &ProfileFeatures) -> Result<GestureKind> {
        self.classify(features)
    }
}

impl Trainer for HierarchyConfig {
    type Model = HierarchyModel;

    fn train(&self, samples: &[(&ProfileFeatures, GestureKind)]) -> Result<HierarchyModel> {
        HierarchyModel::train(samples, self)
    }
}

/// Gesture-vs-background detection outcome counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionStats {
    /// NoGesture examples classified as some gesture.
    pub false_accepts: u64,
    pub negatives: u64,
    /// Gesture examples classified as NoGesture.
    pub false_rejects: u64,
    pub positives: u64,
}

impl DetectionStats {
    pub fn false_accept_rate(&self) -> Option<f64> {
        (self.negatives > 0).then(|| self.false_accepts as f64 / self.negatives as f64)
    }

    pub fn false_reject_rate(&self) -> Option<f64> {
        (self.positives > 0).then(|| self.false_rejects as f64 / self.positives as f64)
    }

    fn merge(&mut self, o: &DetectionStats) {
        self.false_accepts += o.false_accepts;
        self.negatives += o.negatives;
        self.false_rejects += o.false_rejects;
        self.positives += o.positives;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub confusion: ConfusionMatrix,
    pub detection: DetectionStats,
    pub folds: usize,
}

impl CvReport {
    pub fn average_accuracy(&self) -> Option<f64> {
        self.confusion.average_accuracy()
    }
}

/// Tallies predictions of `model` on `samples` into a confusion matrix.
pub fn evaluate<P: Predictor>(
    model: &P,
    samples: &[(&ProfileFeatures, GestureKind)],
) -> Result<(ConfusionMatrix, DetectionStats)> {
    let mut cm = ConfusionMatrix::new();
    let mut det = DetectionStats::default();
    for (f, truth) in samples {
        let pred = model.predict(f)?;
        cm.record(*truth, pred);
        if *truth == GestureKind::NoGesture {
            det.negatives += 1;
            det.false_accepts += u64::from(pred != GestureKind::NoGesture);
        } else {
            det.positives += 1;
            det.false_rejects += u64::from(pred == GestureKind::NoGesture);
        }
    }
    Ok((cm, det))
}

/// Repeated stratified hold-out: train on each split's training part, test
/// on its held-out part, pool every prediction.
pub fn cross_validate<T: Trainer>(
    data: &[(ProfileFeatures, GestureKind)],
    trainer: &T,
    config: &CvConfig,
) -> Result<CvReport> {
    config.validate()?;
    let labels: Vec<GestureKind> = data.iter().map(|(_, g)| *g).collect();
    let folds = config.effective_folds();
    let results: Vec<(ConfusionMatrix, DetectionStats)> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let split = stratified_split(&labels, config.test_fraction, config.seed, fold)?;
            let pick = |idx: &[usize]| idx.iter().map(|&i| (&data[i].0, data[i].1)).collect::<Vec<_>>();
            let model = trainer.train(&pick(&split.train))?;
            evaluate(&model, &pick(&split.test))
        })
        .collect::<Result<_>>()?;
    let mut confusion = ConfusionMatrix::new();
    let mut detection = DetectionStats::default();
    for (cm, det) in &results {
        confusion.merge(cm);
        detection.merge(det);
    }
    Ok(CvReport { confusion, detection, folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{RangeMatrix, RssVector};
    use proptest::prelude::*;

    fn labels(per_class: usize) -> Vec<GestureKind> {
        GestureKind::ALL.iter().flat_map(|&g| std::iter::repeat_n(g, per_class)).collect()
    }

    /// Stores the true label in the first RSS entry.
    fn tagged(g: GestureKind) -> ProfileFeatures {
        let code = GestureKind::ALL.iter().position(|&x| x == g).unwrap() as f64;
        ProfileFeatures {
            rss: RssVector { values: vec![code] },
            range: RangeMatrix { rows: Vec::new(), k: 20, frame_len: 960 },
        }
    }

    struct Oracle;
    impl Predictor for Oracle {
        fn predict(&self, f: &ProfileFeatures) -> Result<GestureKind> {
            Ok(GestureKind::ALL[f.rss.values[0] as usize])
        }
    }
    struct OracleTrainer;
    impl Trainer for OracleTrainer {
        type Model = Oracle;
        fn train(&self, _: &[(&ProfileFeatures, GestureKind)]) -> Result<Oracle> {
            Ok(Oracle)
        }
    }

    struct Constant(GestureKind);
    impl Predictor for Constant {
        fn predict(&self, _: &ProfileFeatures) -> Result<GestureKind> {
            Ok(self.0)
        }
    }
    struct MajorityTrainer;
    impl Trainer for MajorityTrainer {
        type Model = Constant;
        fn train(&self, samples: &[(&ProfileFeatures, GestureKind)]) -> Result<Constant> {
            let mut counts = [0usize; 6];
            for (_, g) in samples.iter().filter(|(_, g)| *g != GestureKind::NoGesture) {
                counts[GestureKind::ALL.iter().position(|x| x == g).unwrap()] += 1;
            }
            let best = (0..6).max_by_key(|&i| (counts[i], std::cmp::Reverse(i))).unwrap();
            Ok(Constant(GestureKind::ALL[best]))
        }
    }

    fn dataset(per_class: usize) -> Vec<(ProfileFeatures, GestureKind)> {
        labels(per_class).into_iter().map(|g| (tagged(g), g)).collect()
    }

    #[test]
    fn oracle_gives_identity() {
        let r = cross_validate(&dataset(50), &OracleTrainer, &CvConfig::default()).unwrap();
        let n = r.confusion.normalized();
        for (i, row) in n.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, Some(if i == j { 1.0 } else { 0.0 }));
            }
        }
        assert_eq!(r.average_accuracy(), Some(1.0));
        assert_eq!(r.detection.false_accept_rate(), Some(0.0));
    }

    #[test]
    fn majority_stub_scores_one_fifth() {
        let r = cross_validate(&dataset(50), &MajorityTrainer, &CvConfig::default()).unwrap();
        assert!((r.average_accuracy().unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn single_mode_uses_one_split() {
        let cfg = CvConfig { mode: CvMode::Single, ..Default::default() };
        let r = cross_validate(&dataset(25), &OracleTrainer, &cfg).unwrap();
        assert_eq!(r.folds, 1);
        assert_eq!(r.confusion.total(), 5 * 2);
    }

    #[test]
    fn singleton_class_is_rejected() {
        let mut l = labels(10);
        l.push(GestureKind::NoGesture);
        l.retain(|g| *g != GestureKind::Fwd);
        l.push(GestureKind::Fwd);
        assert!(matches!(stratified_split(&l, 0.08, 0, 0), Err(Error::ClassMissingFromSplit(_))));
    }

    proptest! {
        #[test]
        fn splits_are_disjoint_deterministic_and_stratified(
            per_class in 2usize..40, seed in any::<u64>(), fold in 0usize..20, frac in 0.01..0.99f64
        ) {
            let l = labels(per_class);
            let a = stratified_split(&l, frac, seed, fold).unwrap();
            prop_assert_eq!(&a, &stratified_split(&l, frac, seed, fold).unwrap());
            prop_assert_eq!(a.train.len() + a.test.len(), l.len());
            prop_assert!(a.train.iter().all(|i| a.test.binary_search(i).is_err()));
            for class in GestureKind::ALL {
                prop_assert!(a.train.iter().any(|&i| l[i] == class));
                prop_assert!(a.test.iter().any(|&i| l[i] == class));
            }
        }
    }
}
