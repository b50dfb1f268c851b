use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("component {0}: covariance is not positive definite")]
    ComponentNotPositiveDefinite(usize),
    #[error("zero variance in dimension {0}")]
    ZeroVariance(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("parse error at row {row}, column {col}: {msg}")]
    ParseError { row: usize, col: usize, msg: String },
    #[error("ragged rows: row {row} has {got} fields, expected {expected}")]
    RaggedRows { row: usize, expected: usize, got: usize },
    #[error("io error on {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("class {0} has fewer than two members")]
    ClassTooSmall(usize),
    #[error("degenerate range in dimension {0}")]
    DegenerateRange(usize),
    #[error("k-th neighbour distance is zero at observation {0}")]
    DuplicatePointsExceedK(usize),
    #[error("no unassigned entries left")]
    EmptySelection,
    #[error("invalid bracket ({low}, {mid}, {high})")]
    InvalidBracket { low: usize, mid: usize, high: usize },
    #[error("mixture density underflows to zero at entry {0}")]
    ZeroDensity(usize),
    #[error("AICc needs n > M + 1 (n = {n}, M = {m})")]
    InsufficientN { n: usize, m: usize },
    #[error("zero conditional empirical density in dimension {0}")]
    SingularConditional(usize),
    #[error("support mass {mass} is too small for dimension {d}")]
    InsufficientSupport { mass: f64, d: usize },
    #[error("unknown {kind} name {name:?}")]
    UnknownName { kind: &'static str, name: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no candidate model could be estimated")]
    NoModel,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            msg: err.to_string(),
        }
    }

    /// True for usage and I/O problems as opposed to numerical failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::ParseError { .. }
                | Error::RaggedRows { .. }
                | Error::UnknownName { .. }
                | Error::InvalidArgument(_)
                | Error::Unsupported(_)
                | Error::DimensionMismatch { .. }
                | Error::LengthMismatch { .. }
        )
    }
}
