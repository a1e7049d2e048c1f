use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge after {levels} refinements (last two estimates {previous:e}, {last:e})")]
    NoConvergence {
        levels: usize,
        previous: f64,
        last: f64,
    },

    #[error("covariance grid is not even: max |Im| = {imag:e} exceeds {limit:e}")]
    SymmetryViolation { imag: f64, limit: f64 },

    #[error("embedding is not positive semidefinite: min eigenvalue {min_eig:e}, max eigenvalue {max_eig:e}")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("no bracket: predicate false at N = {n_max} after expansion")]
    NoBracket { n_max: usize },

    #[error("resource limit: {cells} grid cells exceeds cap {cap}")]
    ResourceLimit { cells: u128, cap: u128 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("bad TGRF file: {0}")]
    Format(String),

    #[error("io error on {path:?}: {source}")]
    Io {
        path: Option<PathBuf>,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::Io { path: None, source }
    }
}

impl Error {
    pub(crate) fn io_at(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: Some(path.into()),
            source,
        }
    }
}
