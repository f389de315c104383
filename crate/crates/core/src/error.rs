use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("unphysical state: rho = {rho}, theta = {theta}{}", cell.map(|c| format!(" at cell {c}")).unwrap_or_default())]
    Unphysical {
        rho: f64,
        theta: f64,
        cell: Option<usize>,
    },

    #[error("unphysical state at step {step}, t = {time}: {source}")]
    RunAborted {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("polynomial degree {degree} exceeds the admissible degree {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("signal velocities out of order: lambda_L = {left} > lambda_R = {right}")]
    SignalOrder { left: f64, right: f64 },

    #[error("operator dimension {0} too large for a dense eigensolve")]
    DimensionTooLarge(usize),

    #[error("non-finite value in field: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("steady state not reached within {steps} steps (last rate {rate:e})")]
    NotConverged { steps: usize, rate: f64 },

    #[error("velocity grid overflow: boundary-node mass fraction {0:e}")]
    VelocityOverflow(f64),

    #[error("malformed snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { what, value })
    }
}
