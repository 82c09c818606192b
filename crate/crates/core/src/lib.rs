//! Single-transmitter / single-receiver ultrasonic hand-gesture recognition.
//!
//! The pipeline runs transmit design ([`signal`]) through a synthetic echo
//! channel ([`simulator`]), matched filtering and de-cluttering ([`dsp`]),
//! per-profile feature extraction ([`features`]) and a tree of LS-SVM
//! classifiers ([`classifier`]). [`eval`] builds labelled datasets and
//! cross-validates the whole chain.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod rng;
pub mod signal;
pub mod simulator;

pub use classifier::{HierarchyConfig, HierarchyModel, LsSvmModel, ProfileFeatures};
pub use dsp::{CorrelationFrame, DspConfig, MotionFrame};
pub use error::{Error, Result};
pub use features::{MotionProfile, RangeMatrix, RssVector};
pub use signal::{PulseTrainConfig, Waveform};
pub use simulator::{GestureKind, Scene, Trajectory};
