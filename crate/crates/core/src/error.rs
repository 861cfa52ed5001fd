use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit can report.
///
/// Variants fall into two families: validation failures (bad values, shapes
/// or numerical breakdowns) and input/output failures (unreadable or
/// malformed files). [`Error::is_io`] tells them apart; the CLI maps the
/// first family to exit code 1 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("matrix rows have unequal length: row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("row {row} sums to {sum}, outside the load tolerance")]
    RowSumOutOfTolerance { row: usize, sum: f64 },
    #[error("need at least {min} {what}, got {got}")]
    DegenerateDimension { what: &'static str, min: usize, got: usize },

    #[error("label list is empty")]
    EmptyLabels,
    #[error("label at position {index} is out of range")]
    OutOfRange { index: usize },
    #[error("class {0} never occurs in the labels")]
    MissingClass(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("trace came out negative ({0}); pseudo-inverse is broken")]
    NegativeTrace(f64),
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("input is constant")]
    ConstantInput,
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("empty input")]
    Empty,
    #[error("labels are not binary")]
    NotBinary,
    #[error("positive class {0} does not occur in the actual labels")]
    MissingPositiveClass(i64),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("{path}: malformed input at {location}: {reason}")]
    Malformed { path: PathBuf, location: String, reason: String },
    #[error("{path}: header declares {declared} values but payload holds {actual}")]
    DimensionHeaderMismatch { path: PathBuf, declared: u64, actual: u64 },
    #[error("{path}: unsupported format or version: {detail}")]
    UnsupportedVersion { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl Error {
    /// True for file-level failures (missing files, malformed content).
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Malformed { .. }
                | Error::DimensionHeaderMismatch { .. }
                | Error::UnsupportedVersion { .. }
                | Error::Io { .. }
                | Error::Json { .. }
        )
    }
}
