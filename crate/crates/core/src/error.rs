use thiserror::Error;

/// Errors produced by the estimators, tests, harness and config layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sequence too short: {what} has {len} samples, need at least {min}")]
    Length {
        what: &'static str,
        len: usize,
        min: usize,
    },

    #[error("non-finite sample {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("clusters not separable: d1 = {d1} <= d2 = {d2}")]
    Separation { d1: f64, d2: f64 },

    #[error("operation requires a null cluster but none is configured")]
    MissingNull,

    #[error("null cluster lies within a doubled uncertainty set of cluster {cluster}")]
    NullTooClose { cluster: usize },

    #[error("population MMD has no closed form for kernel {0}")]
    UnsupportedKernel(String),

    #[error("worst-case model is not defined for MMD-ball uncertainty; convert to a mean interval first")]
    UnsupportedUncertainty,

    #[error("threshold arity mismatch: {0}")]
    Arity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sample source exhausted: {0}")]
    SourceExhausted(String),

    #[error("invalid {field}: {rule}")]
    Invalid { field: String, rule: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            rule: rule.into(),
        }
    }

    /// True for errors caused by a bad configuration or bad input data, as
    /// opposed to I/O failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
