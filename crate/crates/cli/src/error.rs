//! CLI error type with its process exit-code mapping.

use std::path::PathBuf;
use thiserror::Error;

/// Exit codes: 0 success, 2 config or parse failure, 3 missing prerequisite
/// artifact, 4 numerical divergence, 1 anything else.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("missing artifact: {0} (run the earlier pipeline stages first)")]
    MissingArtifact(PathBuf),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse(_) => 2,
            CliError::MissingArtifact(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("io: {e}"))
    }
}
