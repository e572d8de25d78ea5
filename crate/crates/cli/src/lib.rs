//! Command-line front end for the `rieffel` library: run configuration,
//! verification suites and report emission.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

use std::fmt;

/// Failure classes, one per process exit code.
#[derive(Debug)]
pub enum CliError {
    /// A check ran and failed, or a computation did not converge (exit 1).
    Check(String),
    /// Unreadable or malformed input (exit 2).
    Parse(String),
    /// Bad flags or arguments (exit 3).
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Check(_) => 1,
            Self::Parse(_) => 2,
            Self::Usage(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Check(m) | Self::Parse(m) | Self::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rieffel::Error> for CliError {
    fn from(e: rieffel::Error) -> Self {
        use rieffel::Error as E;
        match e {
            E::Io(_) | E::Format { .. } | E::Invalid(_) => Self::Parse(e.to_string()),
            _ => Self::Check(e.to_string()),
        }
    }
}
