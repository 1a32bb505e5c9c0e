//! Experiment harness for `pbpqlp-core`: PGM image IO, run configuration,
//! delimiter-separated tables and the `pbpqlp` command line.

pub mod cli;
pub mod commands;
pub mod config;
pub mod dsv;
pub mod error;
pub mod pgm;

pub use commands::{run, Outcome};
pub use config::{Command, RunConfig};
pub use error::{BenchError, Result};
