use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] bhl_core::Error),

    #[error("{failed} of {total} cells failed")]
    Partial { failed: usize, total: usize },
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn config(path: impl Into<String>, message: impl std::fmt::Display) -> Self {
        HarnessError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for anything the caller can fix in the invocation, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Config { .. } => 2,
            HarnessError::Core(bhl_core::Error::Config(_)) => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Usage(_) => "usage",
            HarnessError::Config { .. } => "config",
            HarnessError::Io { .. } => "io",
            HarnessError::Core(e) => match e {
                bhl_core::Error::Domain(_) => "domain",
                bhl_core::Error::Numerical { .. } => "numerical",
                bhl_core::Error::Convergence(_) => "convergence",
                bhl_core::Error::Config(_) => "config",
                bhl_core::Error::Resource { .. } => "resource",
            },
            HarnessError::Partial { .. } => "partial",
        }
    }

    /// Machine-readable error record printed on stderr.
    pub fn record(&self) -> serde_json::Value {
        json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() })
    }
}
