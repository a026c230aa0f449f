use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split into two families: validation failures (bad parameters,
/// regime mismatches, malformed configs) and runtime failures (I/O,
/// numerical breakdown). [`Error::is_validation`] tells them apart, which the
/// CLI uses to pick an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("regime mismatch for `{label}`: {reason}")]
    Regime { label: String, reason: String },

    #[error("long-run variance of `{label}` is {sigma_sq:e}, must be strictly positive for a short-memory component")]
    NonPositiveLongRunVariance { label: String, sigma_sq: f64 },

    #[error("noise window does not cover index {index} (window is {first}..={last})")]
    NoiseWindow { index: i64, first: i64, last: i64 },

    #[error("kernel support has {size} tuples, above the cap of {cap}")]
    SupportTooLarge { size: u64, cap: u64 },

    #[error("kernel is not absolutely summable over a finite support: {0}")]
    InfiniteSupport(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn regime(label: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Regime {
            label: label.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the caller's input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Quadrature(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
