use std::path::PathBuf;

use thiserror::Error;

use crate::bvp::Parity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or parameter values.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input sequences or scalars violate an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{parity} parity solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        parity: Parity,
        iterations: usize,
        residual: f64,
    },

    #[error("singular Jacobian (zero pivot in column {column})")]
    SingularJacobian { column: usize },

    /// The operation requires finite islands (normalisable parity states).
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(&'static str),

    /// Two formulas for the same quantity disagree beyond the allowed tolerance.
    #[error("numerical inconsistency in {quantity}: {primary:e} vs {dual:e}")]
    Inconsistent {
        quantity: &'static str,
        primary: f64,
        dual: f64,
    },

    /// Madelung variables hit the |n| = 1 singularity or an amplitude vanished.
    #[error("Madelung singularity: {0}")]
    Singularity(String),

    #[error("all {0} sweep points failed")]
    SweepFailed(usize),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidInput(_) | Error::UnsupportedGeometry(_) => 2,
            Error::NonConvergence { .. }
            | Error::SingularJacobian { .. }
            | Error::SweepFailed(_)
            | Error::Inconsistent { .. } => 3,
            Error::Io { .. } | Error::Serialization(_) => 4,
            Error::Singularity(_) => 1,
        }
    }
}
