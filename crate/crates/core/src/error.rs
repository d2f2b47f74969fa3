use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The orbit left every bounded region (non-finite coordinate).
    #[error("orbit diverged at step {step}")]
    OrbitDivergence { step: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid partition: {n} blocks over a series of length {len}")]
    InvalidPartition { n: usize, len: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("sample too small: need at least {needed} values, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("non-finite value in sample")]
    NonFinite,

    /// Constant sample: L-scale is zero and no scale-dependent fit exists.
    #[error("degenerate sample (zero L-scale)")]
    Degenerate,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("estimator undefined: {0}")]
    UndefinedEstimator(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("config line {line}: {key}: {msg}")]
    Config { line: usize, key: String, msg: String },

    #[error("record format: {0}")]
    Record(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Record(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Record(e.to_string())
    }
}
