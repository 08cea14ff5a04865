//! Crate-wide error type.
//!
//! Variants map onto the CLI exit-code contract: configuration and argument
//! problems exit 1, input-data problems exit 2, numerical non-convergence
//! exits 3.

use thiserror::Error;

/// Errors produced by the library and the CLI layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A call violated an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Iterative eigenvalue computation hit its iteration cap.
    #[error(
        "spectral norm iteration did not converge after {iterations} iterations \
         (last estimate {last_estimate:e})"
    )]
    Convergence {
        iterations: usize,
        last_estimate: f64,
    },

    /// Model parameters make a statistic undefined (e.g. zero expected degree).
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// Threshold calibration could not reach the requested error target.
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// Malformed run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input data file, with the offending line when known.
    #[error("{path}:{line}: {message}")]
    InputData {
        path: String,
        line: usize,
        message: String,
    },

    /// Filesystem failure while reading or writing.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for the CLI: 1 usage/config, 2 input data, 3 convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Domain(_)
            | Error::DegenerateModel(_)
            | Error::Calibration(_)
            | Error::Config(_) => 1,
            Error::InputData { .. } | Error::Io { .. } => 2,
            Error::Convergence { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
