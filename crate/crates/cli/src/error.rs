//! Error type carrying the exit-code distinction: usage errors exit 2,
//! runtime failures exit 1.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or file contents supplied by the user.
    Usage(String),
    /// Failures while running: IO, numerics, inconsistent inputs.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {e}"))
    }
}

impl From<aamr_core::Error> for CliError {
    fn from(e: aamr_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
