use std::path::PathBuf;

use quench_core::QuenchError;
use thiserror::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config file {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Quench(#[from] QuenchError),

    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } => EXIT_USAGE,
            CliError::Quench(QuenchError::InvalidParameter { .. }) => EXIT_USAGE,
            CliError::Quench(_) => EXIT_NUMERICAL,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(usage("x").exit_code(), 2);
        assert_eq!(CliError::from(QuenchError::InvalidParameter { name: "m", reason: "bad".into() }).exit_code(), 2);
        assert_eq!(CliError::from(QuenchError::NoConvergence { iterations: 3, residual: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 4);
    }
}
