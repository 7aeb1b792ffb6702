use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violates a documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The inputs are valid but lie outside the regime where a formula holds.
    #[error("outside regime of validity: {0}")]
    Regime(String),

    /// A numerical procedure failed to converge or was aborted.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Configuration could not be parsed or validated.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects NaN and infinities.
pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be >= 0, got {value}")))
    }
}
