use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("emitter index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("search failed for N={n}: {reason}")]
    Search { n: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
