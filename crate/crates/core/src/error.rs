use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index out of range: {what} = {got}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("degenerate window ({s}, {t}, {u}): boundaries must satisfy s < t < u")]
    DegenerateWindow { s: usize, t: usize, u: usize },

    #[error("window ({s}, {t}, {u}) exceeds the data length {len}")]
    WindowTooLarge {
        s: usize,
        t: usize,
        u: usize,
        len: usize,
    },

    #[error("nonpositive variance {value} for window ({s}, {t}, {u}); covariance table is defective")]
    NonPositiveVariance { s: usize, t: usize, u: usize, value: f64 },

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("csv parse failure at line {line}: {reason}")]
    CsvData { line: u64, reason: String },

    #[error("csv read failure: {0}")]
    Csv(#[from] csv::Error),

    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("nonpositive value {value} at position {index}: log-differencing needs positive levels")]
    NonPositiveLevel { index: usize, value: f64 },

    #[error("singular regression design: {0}")]
    SingularDesign(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for an `InvalidParameter` error.
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
