use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    /// Evaluation requested on the rotation axis where the quantity is singular.
    #[error("axis singularity: {0}")]
    AxisSingularity(String),

    /// Kernel evaluated at (or numerically at) the coincident point.
    #[error("kernel singularity: {0}")]
    Singularity(String),

    #[error("elliptic integral diverges: modulus k = {0} >= 1")]
    Divergence(f64),

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("parse error at line {line}, key `{key}`: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
