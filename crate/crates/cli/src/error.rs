use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid config: {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] bohm_core::Error),
}

impl CliError {
    /// 2 for anything the caller can fix by changing the invocation or the
    /// config, 1 for failures inside a run.
    pub fn exit_code(&self) -> u8 {
        use bohm_core::Error as E;
        match self {
            CliError::Core(E::Usage(_) | E::Domain(_) | E::InvalidFamily(_) | E::NoBoundState(_)) => 2,
            CliError::Core(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn invalid(field: &str, message: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
