use alloc::string::String;
use core::fmt;

/// Errors raised by kernels, factorizations, generators and evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A zero or mismatched dimension.
    Dimension(String),
    /// An input matrix holds NaN or infinite entries.
    NonFinite,
    /// A parameter is outside its admissible range.
    Parameter(String),
    /// An iterative method hit its iteration cap; carries the best estimate so far.
    Convergence { estimate: f64, iterations: usize },
    /// An input violated a structural requirement (e.g. orthonormality).
    Input(String),
    /// A precondition of a bound evaluator failed.
    Context(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::NonFinite => write!(f, "input error: matrix contains non-finite entries"),
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Convergence {
                estimate,
                iterations,
            } => write!(
                f,
                "convergence error after {iterations} iterations (best estimate {estimate:e})"
            ),
            Error::Input(msg) => write!(f, "input error: {msg}"),
            Error::Context(msg) => write!(f, "context error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
extern crate std;

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
