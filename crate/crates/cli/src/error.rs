use std::fmt;
use std::process::ExitCode;

use plaplab::error::LabError;

/// Failure classes of a command, each with a fixed exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: bad flags, config, parameters or input files.
    Invalid(String),
    /// Exit 3: numerical breakdown or I/O failure.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) => ExitCode::from(2),
            CliError::Failed(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Parameter { .. }
            | LabError::Regime(_)
            | LabError::Domain(_)
            | LabError::Input(_) => CliError::Invalid(e.to_string()),
            LabError::Numerical(_) | LabError::Io(_) => CliError::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}
