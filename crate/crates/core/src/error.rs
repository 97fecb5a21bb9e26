use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {0} is outside the open interval (0, 1)")]
    InvalidProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not reach tolerance within {0} subdivisions")]
    SubdivisionLimitExceeded(usize),
    #[error("rank {r} is outside 1..={k}")]
    RankOutOfRange { r: usize, k: usize },
    #[error("cdf at t={t} is {mass:e}, too small to condition on")]
    ZeroMass { t: f64, mass: f64 },
    #[error("enumeration needs {states} states, limit is {limit}")]
    StateSpaceLimitExceeded { states: u128, limit: u128 },
    #[error("plug-in variance is undefined at t={0}: no observation at or below t")]
    UndefinedAtT(f64),
    #[error("estimate carries no variance")]
    MissingVariance,
    #[error("invalid experiment configuration: {0}")]
    ConfigInvalid(String),
    #[error("sample must contain at least one observation")]
    EmptySample,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Self::Parse(e.to_string())
    }
}
