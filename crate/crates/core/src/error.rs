use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ArgusError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ArgusError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}:{column}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: schema violation at `{location}`: {message}")]
    Schema {
        path: PathBuf,
        location: String,
        message: String,
    },

    #[error("{path}: dangling reference at `{location}`: no {what} named `{name}`")]
    DanglingReference {
        path: PathBuf,
        location: String,
        what: &'static str,
        name: String,
    },

    #[error("unsupported schema_version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },

    #[error("out-of-order buffer update: frame {frame} after frame {last}")]
    Sequencing { frame: u64, last: u64 },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("unreachable goal: {0}")]
    UnreachableGoal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl ArgusError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
