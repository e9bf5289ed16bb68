use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty minibatch")]
    EmptyBatch,

    #[error("minibatch index {index} out of range for {n} observations")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),

    #[error("sampler requires at least one observation; sample the prior instead")]
    NoData,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
