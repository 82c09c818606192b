use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: received {received} samples, template {template}")]
    LengthMismatch { received: usize, template: usize },

    #[error("block has {actual} samples, expected {expected}")]
    BadBlockLength { expected: usize, actual: usize },

    #[error("echo delay {delay_s:.6} s is not shorter than the pulse period {period_s:.6} s")]
    DelayExceedsFrame { delay_s: f64, period_s: f64 },

    #[error("clutter factor {0} outside [0, 1]")]
    InvalidClutterFactor(f64),

    #[error("frame has no non-zero value inside the range gate")]
    EmptyFrame,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("LS-SVM system is singular")]
    SingularSystem,

    #[error("training data contains a single class")]
    OneClassInput,

    #[error("class {0} is missing from a training split")]
    ClassMissingFromSplit(String),

    #[error("malformed WAV: {0}")]
    MalformedWav(String),

    #[error("WAV sample rate {actual} Hz does not match configured {expected} Hz")]
    SampleRateMismatch { expected: u32, actual: u32 },

    #[error("malformed data: {0}")]
    MalformedData(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
