//! Error types shared across the review engine.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("schema violation for `{tag}` after {attempts} attempt(s): {message}")]
    SchemaViolation {
        tag: String,
        attempts: u32,
        message: String,
    },

    #[error("playbook has no entry matching tag `{0}`")]
    PlaybookMiss(String),

    #[error("blank input: {0}")]
    BlankInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Malformed { what: String, message: String },

    #[error("rule base version mismatch: report built against {report}, gold expects {gold}")]
    RuleBaseMismatch { report: String, gold: String },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Malformed {
            what: what.into(),
            message: message.into(),
        }
    }

    /// Transport-class failures are retried by the gateway; everything else
    /// fails immediately.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Transport { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
