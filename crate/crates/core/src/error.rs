use thiserror::Error;

/// Errors raised by the decomposition library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("state outside support: {0:?}")]
    OutsideSupport(Vec<u32>),

    #[error("KL undefined: prior assigns zero to a posterior-support state {0:?}")]
    KlUndefined(Vec<u32>),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// The requested exhaustive computation exceeds the size cap.
    #[error("ground set of size {size} exceeds the limit of {limit} for {what}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error stems from a size cap on exhaustive search
    /// rather than from bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::TooLarge { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
