use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("component index {index} out of range (profile has {count} components)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("no closed-form asymptotics for rate {rate} with delay {delay}; supply (beta, eta) manually")]
    NoClosedForm { rate: &'static str, delay: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("history query at t = {query} outside recorded range [{start}, {end}]")]
    HistoryOutOfRange { query: f64, start: f64, end: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not a Metzler matrix with zero row sums: {0}")]
    NotMetzler(String),

    #[error("coupling matrix is reducible (left eigenvector has a zero entry)")]
    Reducible,

    #[error("condition is infeasible: {0}")]
    Infeasible(String),

    #[error("functional {functional} requires {missing}")]
    MissingInput { functional: &'static str, missing: &'static str },

    #[error("malformed trajectory csv: {0}")]
    Csv(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
