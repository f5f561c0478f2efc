use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("128-bit overflow while building table `{label}` at index {index}")]
    Overflow { label: String, index: usize },

    #[error("table `{label}` covers n <= {available}, but n <= {needed} is required")]
    TableTooShort {
        label: String,
        needed: u64,
        available: u64,
    },

    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("rank-deficient design: column {column} has relative pivot {pivot:e}")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("coefficient cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
