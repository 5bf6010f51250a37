use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{scenario} (trial {trial}): {source}")]
    Scenario {
        scenario: String,
        trial: usize,
        #[source]
        source: iclab::Error,
    },

    #[error("runtime error: {0}")]
    Runtime(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for bad configuration, 3 for everything that
    /// fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Scenario {
                source: iclab::Error::Config(_),
                ..
            } => 2,
            _ => 3,
        }
    }
}

impl From<iclab::Error> for CliError {
    fn from(e: iclab::Error) -> Self {
        match e {
            iclab::Error::Config(msg) => Self::Config(msg),
            other => Self::Runtime(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
