use csym_core::CsymError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema violation at a JSON-pointer location.
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] CsymError),
}

impl CliError {
    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        let pointer = pointer.into();
        CliError::Schema {
            pointer: if pointer.is_empty() { "/".into() } else { pointer },
            message: message.into(),
        }
    }

    /// 1 for a failed property, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CsymError::PropertyViolation { .. }) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
