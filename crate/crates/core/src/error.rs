use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coordinate inversion did not converge for point ({x:.6}, {y:.6}, {z:.6})")]
    Inversion { x: f64, y: f64, z: f64 },

    #[error("stencil error: node ({x:.6}, {y:.6}, {z:.6}) {reason}")]
    Stencil {
        x: f64,
        y: f64,
        z: f64,
        reason: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("instability at node ({i}, {j}, {k}) at t = {t}: non-finite value")]
    Instability { i: usize, j: usize, k: usize, t: f64 },

    #[error("scene is not certified: {0}")]
    Uncertified(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("audit refused: {0}")]
    AuditRefused(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
