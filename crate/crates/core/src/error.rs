use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: a zero-length byte sequence has no frequency distribution")]
    EmptyInput,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric (|a[{row}][{col}] - a[{col}][{row}]| = {diff:e})")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    NotConverged { sweeps: usize, off_diagonal: f64 },

    #[error("{what} = {value} is out of range {min}..={max}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("bad network architecture: {0}")]
    BadArchitecture(String),

    #[error("training loss became non-finite at epoch {epoch} (learning rate too large?)")]
    NonFiniteLoss { epoch: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("at least 2 classes are required, got {0}")]
    TooFewClasses(usize),

    #[error("corpus root {0} has no class subdirectories")]
    NoClasses(PathBuf),

    #[error("class '{0}' has no usable (non-empty) files")]
    EmptyClass(String),

    #[error("class '{class}' has {available} files, {needed} required")]
    InsufficientFiles {
        class: String,
        needed: usize,
        available: usize,
    },

    #[error("label '{0}' is not known to the model")]
    UnknownLabel(String),

    #[error("test corpus is empty")]
    EmptyCorpus,

    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u64 },

    #[error("corrupt model at '{path}': {message}")]
    CorruptModel { path: String, message: String },

    #[error("bad synthetic corpus spec: {0}")]
    BadSpec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }
}
