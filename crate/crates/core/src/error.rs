use thiserror::Error;

/// Errors raised by the walk laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse group spec {input:?}: {reason}")]
    ParseSpec { input: String, reason: String },

    #[error("element encoding is not canonical for {group}: {reason}")]
    Encoding { group: String, reason: String },

    #[error("memory budget of {budget_bytes} bytes exceeded at radius/step {reached}")]
    BudgetExceeded { budget_bytes: u64, reached: usize },

    #[error("invalid homomorphism descriptor: {0}")]
    Homomorphism(String),

    #[error("trace does not contain step {step} (reached {reached})")]
    MissingStep { step: usize, reached: usize },

    #[error("no value for element at step {step}: not retained, watched, or radial")]
    ValueUnavailable { step: usize },

    #[error("word length unavailable: {0}")]
    LengthUnavailable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series rejected: {0}")]
    Series(String),

    #[error("cache file is corrupt: {0}")]
    CorruptCache(String),

    #[error("cache version {found} does not match supported version {expected}")]
    CacheVersion { found: u32, expected: u32 },

    #[error("cache holds a trace for {found}, expected {expected}")]
    SpecMismatch { found: String, expected: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
