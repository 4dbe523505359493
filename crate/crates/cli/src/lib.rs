//! Command-line front end for the tail-estimation pipeline.
//!
//! Exposed as a library so integration tests drive the exact code paths of
//! the binary. Exit-code contract: 0 success, 1 usage/config error,
//! 2 data error, 3 internal numeric error.

use std::fmt;

pub mod commands;
pub mod config;
pub mod fixture;
pub mod io;
pub mod report;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys, or missing referenced paths.
    Usage(String),
    /// Unreadable or unusable input data, or output IO failure.
    Data(String),
    /// A numeric procedure failed in a way the data cannot explain.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn from_io(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
