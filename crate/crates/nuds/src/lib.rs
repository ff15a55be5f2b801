//! File formats and commands behind the `nuds` binary.
//!
//! Configs and reports are JSON with a top-level `"schema": 1`; bulk numbers go to CSV.
//! Every command maps its failure to a stable exit code, see [`CliError::exit_code`].

pub mod commands;
pub mod config;
pub mod report;

/// A command failure, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Exit 1: a computation or output write failed.
    #[error("{0}")]
    Numerical(String),
    /// Exit 2: the config, its path or a command-line value is invalid.
    #[error("{0}")]
    Config(String),
    /// Exit 3: the frame condition for the requested recovery fails.
    #[error("{0}")]
    Condition(String),
    /// Exit 4: a scenario did not meet its expectations.
    #[error("{0}")]
    Expectation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Config(_) => 2,
            CliError::Condition(_) => 3,
            CliError::Expectation(_) => 4,
        }
    }
}

impl From<nuds_core::Error> for CliError {
    fn from(e: nuds_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Numerical(format!("csv error: {e}"))
    }
}
