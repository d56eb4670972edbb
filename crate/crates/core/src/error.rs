use std::path::PathBuf;

use thiserror::Error;

use crate::relaxation::GridField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Bandwidth selection needs at least two distinct positions.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("non-positive functional estimate {value} at bandwidth {bandwidth}")]
    NonPositiveFunctional { value: f64, bandwidth: f64 },

    #[error("particle {index} left the finite range at t = {time}")]
    ParticleBlowUp { index: usize, time: f64 },

    /// The deterministic solver produced a non-finite value; the last field
    /// that was entirely finite is kept for post-mortem output.
    #[error("relaxation solver diverged at t = {time}")]
    RelaxationBlowUp {
        time: f64,
        last_good: Box<GridField>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed csv: {reason}")]
    Csv { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
