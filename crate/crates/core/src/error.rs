use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CboError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CboError {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("objective values are stale; evaluate the ensemble before computing the consensus point")]
    StaleCache,

    #[error("objective value at particle {particle} is not finite ({value})")]
    NonFiniteObjective { particle: usize, value: f64 },

    #[error("run diverged at step {step} (particle {particle}) with {params}")]
    Diverged {
        step: usize,
        particle: usize,
        params: String,
    },

    #[error("unsupported dimension: expected {expected}, got {got}")]
    UnsupportedDimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{0} was not recorded")]
    AbsentData(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CboError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CboError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CboError::Io {
            path: path.into(),
            source,
        }
    }
}
