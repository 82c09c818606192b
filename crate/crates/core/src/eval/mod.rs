//! Synthetic dataset generation, cross-validation and result reporting.

mod cv;
mod dataset;
mod report;

pub use cv::{
    cross_validate, evaluate, stratified_split, CvConfig, CvMode, CvReport, DetectionStats, Predictor, Split, Trainer,
};
pub use dataset::{
    build_dataset, build_dataset_with, build_features, noise_std_for_snr, render_profile, scene_for, DatasetItem,
    DatasetSpec, SceneTemplate,
};
pub use report::{write_report, ConfusionMatrix, NormalizedMatrix};
