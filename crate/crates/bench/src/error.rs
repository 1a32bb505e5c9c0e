use std::fmt;
use std::io;
use std::path::PathBuf;

use pbpqlp_core::Error as CoreError;

use crate::pgm::PgmError;

/// Exit statuses of the `pbpqlp` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VIOLATION: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const RESOURCE: i32 = 4;
}

#[derive(Debug)]
pub enum BenchError {
    /// Bad flag, config key or value.
    Usage(String),
    /// Unreadable or malformed input file.
    Input(String),
    Pgm { path: PathBuf, source: PgmError },
    Io { path: PathBuf, source: io::Error },
    /// The run would exceed the memory cap or the order cap.
    Resource(String),
    Core(CoreError),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => exit::USAGE,
            BenchError::Core(CoreError::Parameter(_) | CoreError::Dimension(_)) => exit::USAGE,
            BenchError::Resource(_) => exit::RESOURCE,
            _ => exit::INPUT,
        }
    }
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Usage(m) => write!(f, "usage error: {m}"),
            BenchError::Input(m) => write!(f, "input error: {m}"),
            BenchError::Pgm { path, source } => write!(f, "{}: {source}", path.display()),
            BenchError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            BenchError::Resource(m) => write!(f, "resource refusal: {m}"),
            BenchError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for BenchError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            BenchError::Pgm { source, .. } => Some(source),
            BenchError::Io { source, .. } => Some(source),
            BenchError::Core(e) => Some(e),
            _ => None,
        }
    }
}

impl From<CoreError> for BenchError {
    fn from(e: CoreError) -> Self {
        BenchError::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
