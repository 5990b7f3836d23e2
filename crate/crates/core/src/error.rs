use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("{what} = {value} is outside the supported range {range}")]
    Range {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    /// Adaptive quadrature ran out of subdivisions before meeting the tolerance.
    #[error("quadrature failure: estimate {estimate:e} with error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    /// The N-th order approximation is undefined on the line `beta * eps == 1`.
    #[error("boundary case beta*eps == 1 (eps = {eps}, beta = {beta}); use the closed form beta e^beta K0(2 beta)")]
    BoundaryCase { eps: f64, beta: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A Monte Carlo run aborted. Counts cover the trial batches that completed.
    #[error("trial {trial} failed after {completed_trials} completed trials ({errors} errors so far): {source}")]
    Simulation {
        trial: u64,
        completed_trials: u64,
        errors: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable kind tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Domain { .. } => "domain",
            Error::Range { .. } => "range",
            Error::Quadrature { .. } => "quadrature",
            Error::BoundaryCase { .. } => "boundary_case",
            Error::Dimension { .. } => "dimension",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Simulation { .. } => "simulation",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
