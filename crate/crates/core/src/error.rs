use thiserror::Error;

/// Errors produced by the game kernel, the engine and the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("payment rule `{0}` is stochastic and has no pre-asset inverse")]
    NotInvertible(&'static str),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("match left a non-positive asset ({a_i}, {a_j})")]
    Bankruptcy { a_i: f64, a_j: f64 },

    #[error("conservation drift {drift:e} exceeds {limit:e} after {matches} matches")]
    Integrity {
        drift: f64,
        limit: f64,
        matches: u64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
