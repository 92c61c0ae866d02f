use thiserror::Error;

/// Errors produced by selection, generation and the regression applications.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("rank {rank} is out of range for a sample of {n} elements")]
    RankOutOfRange { rank: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The objective sum left the representable range. Selecting on the
    /// log-transformed sample avoids this.
    #[error("objective overflowed at y = {y:e}; select with the log transform enabled")]
    Overflow { y: f64 },

    /// The data range is so wide that objective sums lose the contribution of
    /// the bulk of the sample.
    #[error("data range {range:e} exceeds {limit:e}; select with the log transform enabled")]
    PrecisionLoss { range: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("all {subsets} elemental subsets were singular")]
    NoFit { subsets: usize },

    #[error("malformed dataset: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
