use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A malformed row found while reading a CSV interchange file.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty trace")]
    EmptyTrace,

    #[error("degenerate trace: all {excluded} pairs have a near-zero model denominator")]
    DegenerateTrace { excluded: usize },

    #[error("trace too short: need {needed} samples, have {available}")]
    TraceTooShort { needed: usize, available: usize },

    #[error("cycle length mismatch: expected {expected} samples (+/-1), got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("offset correction did not reduce the quadrant objective (best dv={dv:e} V, di={di:e} A)")]
    OffsetNonConvergence { dv: f64, di: f64 },

    #[error("underdetermined fit: need at least 2 distinct states, have {distinct}")]
    UnderdeterminedFit { distinct: usize },

    #[error("energy fit did not converge (best A={a:e}, B={b:e}, rss={rss:e})")]
    FitNonConvergence { a: f64, b: f64, rss: f64 },

    #[error("fitted equilibrium B={b:e} is not above observed state r={r:e}")]
    BranchViolation { b: f64, r: f64 },

    #[error("missing segment: {0}")]
    MissingSegment(String),

    #[error("drift sampler failed at input index {index}: {source}")]
    Sampler {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no drift samples for input bin {index} at delay {delay} min")]
    EmptyInputBin { index: usize, delay: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("inconsistent channels: {0}")]
    InconsistentChannels(String),

    #[error("{path}: {count} malformed row(s), first: {first}")]
    MalformedRows {
        path: PathBuf,
        count: usize,
        first: RowError,
        rows: Vec<RowError>,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error stems from bad input data or arguments rather
    /// than a runtime failure (I/O, non-convergence).
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Error::Io { .. } | Error::OffsetNonConvergence { .. } | Error::FitNonConvergence { .. } => false,
            Error::Sampler { source, .. } => source.is_invalid_input(),
            _ => true,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
