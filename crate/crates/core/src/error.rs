use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid DCC base {0}; supported bases are 1..=4")]
    InvalidBase(u8),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("missing or unusable behavior boundaries: {0}")]
    MissingBoundaries(String),

    #[error("training data contains a single class ({0})")]
    SingleClass(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    MissingLabel { path: PathBuf, message: String },

    #[error("{}:{line}: time is not monotone non-decreasing", path.display())]
    NonMonotoneTime { path: PathBuf, line: usize },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document {}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
