use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `Input` covers malformed or dimensionally inconsistent arguments,
/// `Precondition` a mathematical hypothesis of an operation that the input
/// does not satisfy, and `PropertyViolation` an identity that was expected to
/// hold but was measured to fail beyond tolerance.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CsymError {
    #[error("input error: {0}")]
    Input(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("property violation [{key}]: {message} (residual {residual:.3e})")]
    PropertyViolation {
        key: String,
        message: String,
        residual: f64,
    },
}

impl CsymError {
    pub fn input(msg: impl Into<String>) -> Self {
        CsymError::Input(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        CsymError::Precondition(msg.into())
    }

    pub fn violation(key: impl Into<String>, message: impl Into<String>, residual: f64) -> Self {
        CsymError::PropertyViolation {
            key: key.into(),
            message: message.into(),
            residual,
        }
    }
}

pub type Result<T> = std::result::Result<T, CsymError>;
