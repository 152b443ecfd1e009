use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point cloud")]
    EmptyCloud,

    #[error("need at least two points")]
    NeedTwoPoints,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },

    #[error("subset larger than cloud ({requested} > {available})")]
    SubsetTooLarge { requested: usize, available: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate field: zero maximum gradient")]
    DegenerateField,

    #[error("non-finite gradient at point {index} in iteration {iteration}")]
    NonFiniteGradient { index: usize, iteration: usize },

    #[error("coincident points {first} and {second}: k-th neighbor distance is zero")]
    CoincidentPoints { first: usize, second: usize },

    #[error("acceptance rate {rate:e} after {proposals} proposals is below 1e-6")]
    LowAcceptance { rate: f64, proposals: u64 },

    #[error("simplex count {count} exceeds cap {cap}; lower max_eps/max_dim or use a witness complex on landmarks")]
    TooManySimplices { count: usize, cap: usize },

    #[error("closure violation: face {face:?} of simplex {simplex:?} is missing or enters later")]
    ClosureViolation { simplex: Vec<usize>, face: Vec<usize> },

    #[error("matrix is not {0}")]
    BadMatrix(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Degenerate,
    ResourceCap,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DegenerateField
            | Error::NonFiniteGradient { .. }
            | Error::CoincidentPoints { .. }
            | Error::LowAcceptance { .. } => ErrorKind::Degenerate,
            Error::TooManySimplices { .. } => ErrorKind::ResourceCap,
            _ => ErrorKind::Validation,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Validation => 2,
            ErrorKind::Degenerate => 3,
            ErrorKind::ResourceCap => 4,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
