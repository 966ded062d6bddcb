use thiserror::Error;

/// Errors raised by the record-indicator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("observation must have at least one coordinate")]
    EmptyObservation,

    #[error("non-finite coordinate {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("path must contain at least one observation")]
    EmptyPath,

    #[error("length mismatch: expected n = {expected}, got n = {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid record pattern: {0}")]
    InvalidPattern(String),

    /// A computation would exceed a configured size cap.
    #[error("{what} = {requested} exceeds the cap of {cap}")]
    TooLarge {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("probability table is not normalized (total = {0})")]
    Unnormalized(String),

    #[error("invalid probability table: {0}")]
    InvalidPmf(String),

    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("replicate count must be at least 1")]
    NoReplicates,
}

pub type Result<T> = std::result::Result<T, Error>;
