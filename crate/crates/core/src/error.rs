use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate triangle {index}: area {area:e} below tolerance")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("inconsistent edge orientation in triangle {triangle}")]
    EdgeOrientation { triangle: usize },

    #[error("linear solve failed: {reason} (relative residual {residual:e})")]
    Solver { reason: String, residual: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    PicardDivergence { iterations: usize, last_change: f64 },

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Chebyshev order {requested} exceeds reference-tensor cache order {available}; rebuild the cache with a larger --mmax")]
    ChebyshevOrder { requested: usize, available: usize },

    #[error("reference-tensor cache {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("material data: {0}")]
    MaterialData(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
