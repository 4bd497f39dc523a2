use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Davidson did not converge after {iterations} iterations (residual norm {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("objective is not finite at point {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("gradient check failed: analytic {analytic:.6e}, finite difference {numeric:.6e}")]
    GradientMismatch { analytic: f64, numeric: f64 },

    #[error("magnitude fit failed (step 1 objective {step1:.6e}, step 2 objective {step2:.6e}): {reason}")]
    FitFailed {
        step1: f64,
        step2: f64,
        reason: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. }
                | Error::NonFinite { .. }
                | Error::GradientMismatch { .. }
                | Error::FitFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
