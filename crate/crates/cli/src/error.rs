use std::io;
use std::path::PathBuf;

use echogest_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("data: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Input { path: PathBuf, source: CoreError },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Success = 0,
    Config = 2,
    Data = 3,
    Runtime = 4,
}

impl CliError {
    pub fn input(path: impl Into<PathBuf>, source: CoreError) -> Self {
        CliError::Input { path: path.into(), source }
    }

    pub fn exit_kind(&self) -> ExitKind {
        match self {
            CliError::Config(_) => ExitKind::Config,
            CliError::Data(_) => ExitKind::Data,
            CliError::Input { source, .. } => match core_kind(source) {
                ExitKind::Runtime => ExitKind::Data,
                k => k,
            },
            CliError::Core(e) => core_kind(e),
            CliError::Io(_) => ExitKind::Runtime,
        }
    }
}

fn core_kind(e: &CoreError) -> ExitKind {
    match e {
        CoreError::InvalidConfig(_) | CoreError::InvalidClutterFactor(_) | CoreError::DelayExceedsFrame { .. } => {
            ExitKind::Config
        }
        CoreError::MalformedWav(_)
        | CoreError::SampleRateMismatch { .. }
        | CoreError::MalformedData(_)
        | CoreError::LengthMismatch { .. }
        | CoreError::BadBlockLength { .. }
        | CoreError::DimensionMismatch { .. }
        | CoreError::OneClassInput
        | CoreError::ClassMissingFromSplit(_)
        | CoreError::Json(_) => ExitKind::Data,
        CoreError::Io(io) if io.kind() == io::ErrorKind::NotFound => ExitKind::Data,
        CoreError::EmptyFrame | CoreError::SingularSystem | CoreError::Io(_) => ExitKind::Runtime,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
