use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class means coincide (mu == nu), the reduction is undefined")]
    DegenerateMeans,

    #[error("vertex {0} is isolated, degree normalization is undefined")]
    IsolatedVertex(usize),

    #[error("graph has no edges, average degree is zero")]
    EmptyGraph,

    #[error("scale out of range: {0}")]
    Range(String),

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    Convergence { iterations: usize, residual: f64 },

    #[error("vector is not unit norm (norm {0})")]
    NonUnitVector(f64),

    #[error("operator kind {0} is not symmetric")]
    NotSymmetric(&'static str),

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
