use thiserror::Error;

/// Errors raised by the statistics, estimators and simulation harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("n < {min}: need at least {min} observations, got {n}")]
    TooFewObservations { n: usize, min: usize },

    #[error("dimension p = {p} is too small (need p >= {min})")]
    TooFewVariables { p: usize, min: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("bandwidth k = {k} out of range 0..={max}")]
    BandwidthOutOfRange { k: usize, max: usize },

    #[error("V = {0} is not positive; data are degenerate")]
    DegenerateVariance(f64),

    #[error("alpha = {0} must lie in (0, 1)")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fewer than two distinct x values")]
    InsufficientPoints,

    #[error("empty candidate set")]
    NoCandidates,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
}

impl Error {
    /// True for errors caused by the shape or content of the input data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::TooFewObservations { .. }
                | Error::TooFewVariables { .. }
                | Error::NonFinite { .. }
                | Error::Shape(_)
        )
    }

    /// True for numerical degeneracies discovered while computing.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DegenerateVariance(_) | Error::InsufficientPoints)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
