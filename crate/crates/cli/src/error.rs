// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::process::ExitCode;

/// A failure carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// A check ran and did not pass.
    Failed(String),
    /// Bad flags or parameters.
    Usage(String),
    /// Malformed input data.
    Input(String),
    /// Memory or enumeration budget exceeded.
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Resource(_) => 4,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Failed(m) => write!(f, "check failed: {m}"),
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Resource(m) => write!(f, "resource limit: {m}"),
        }
    }
}

impl From<hitab::Error> for CliError {
    fn from(e: hitab::Error) -> Self {
        match e {
            hitab::Error::Domain(_) => CliError::Usage(e.to_string()),
            hitab::Error::Resource { .. } => CliError::Resource(e.to_string()),
            hitab::Error::Parse(_) => CliError::Input(e.to_string()),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn io_usage(what: &str, path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("cannot {what} {}: {e}", path.display()))
}
