use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M†| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace deviates from one (trace = {0})")]
    TraceDeviation(f64),

    #[error("vector is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad subsystem index: {0}")]
    BadIndex(String),

    #[error("alpha must lie strictly inside (0, 1), got {0}")]
    AlphaOutOfRange(f64),

    #[error("bad exponent: {0}")]
    BadExponent(String),

    #[error("entries must be strictly positive")]
    NonPositiveEntry,

    #[error("bad weights: {0}")]
    BadWeights(String),

    #[error("invalid channel: {0}")]
    ChannelInvalid(String),

    #[error("too many subsystems: {0} (at most 6 supported)")]
    NTooLarge(usize),

    #[error("empty state set: {0}")]
    EmptySet(String),

    #[error("parameter vector has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },

    #[error("k out of range: {0}")]
    KOutOfRange(String),

    #[error("embedding dimension {0} too large (2 <= d <= 4)")]
    DTooLarge(usize),

    #[error("mapped witness failed its feasibility check: {0}")]
    FeasibilityCheckFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}
