use std::path::PathBuf;

/// Errors produced anywhere in the assembly, solve and experiment pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no element barycenter lies in the data region")]
    EmptyDataRegion,

    #[error("no element barycenter lies in the measurement region")]
    EmptyRegion,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("condition estimate did not converge after {iterations} iterations (last estimate {last_estimate:e})")]
    EstimationFailure { iterations: usize, last_estimate: f64 },

    #[error("weight construction: crosswind margin {margin:e} exceeds half the strip width {half_width:e}")]
    WeightConstruction { margin: f64, half_width: f64 },

    #[error("weight direction does not match the convection field")]
    DirectionMismatch,

    #[error("assembly defect: quadratic form is negative ({0:e})")]
    AssemblyDefect(f64),

    #[error("insufficient data for rate fit: {usable} usable points, need at least 3")]
    InsufficientData { usable: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
