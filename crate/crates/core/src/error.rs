use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and its diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-positive signal w = {value} at node (i={i}, j={j})")]
    NonPositiveSignal { i: usize, j: usize, value: f64 },

    #[error("non-positive {field} = {value} at node (i={i}, j={j})")]
    NonPositiveValue {
        field: &'static str,
        i: usize,
        j: usize,
        value: f64,
    },

    #[error("non-finite {field} = {value} at node (i={i}, j={j}) after step to t = {t}")]
    NonFinite {
        field: &'static str,
        i: usize,
        j: usize,
        value: f64,
        t: f64,
    },

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("configuration file not found: {}", .0.display())]
    ConfigNotFound(PathBuf),

    #[error("configuration schema violation: {0}")]
    Schema(String),

    #[error("time {time} is not aligned to the step grid (dt = {dt})")]
    Misaligned { time: f64, dt: f64 },

    #[error("malformed field file: {0}")]
    Parse(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
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
