use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The relative quaternion sits on `-1 + [0 0 0]`, where the logarithm is undefined.
    #[error("antipodal orientations: logarithm is undefined")]
    Antipodal,

    #[error("outside the injective domain: {0}")]
    Domain(String),

    #[error("nominal dynamics not stable: {0}")]
    Stability(String),

    #[error("trajectory is empty or too short (need at least {min} samples, got {got})")]
    EmptyTrajectory { min: usize, got: usize },

    #[error("adjacent quaternions {index} and {next} are not hemisphere-aligned (dot = {dot})", next = .index + 1)]
    Alignment { index: usize, dot: f64 },

    #[error("no convergence after {steps} steps (remaining distance {distance} rad)")]
    NonConvergence { steps: usize, distance: f64 },

    #[error("degenerate path: {0}")]
    Degenerate(String),

    #[error("motion direction has zero length")]
    ZeroDirection,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
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
