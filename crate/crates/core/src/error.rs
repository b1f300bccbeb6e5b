use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("upper limit {hi} exceeds the supported maximum {max}")]
    RangeOverflow { hi: u64, max: u64 },

    #[error("window [{lo}, {hi}] does not cover [{need_lo}, {need_hi}]")]
    Coverage {
        lo: u64,
        hi: u64,
        need_lo: u64,
        need_hi: u64,
    },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("window mismatch: {0}")]
    Mismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("transform length {len} exceeds the budget of {max}")]
    Resource { len: usize, max: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: ordinate {value} does not exceed the previous one")]
    Ordering {
        path: PathBuf,
        line: usize,
        value: f64,
    },

    #[error("{0}: no ordinates found")]
    EmptyFile(PathBuf),

    #[error("zero set is empty")]
    EmptyZeroSet,

    #[error("invalid zero set: {0}")]
    InvalidZeroSet(String),

    #[error("root finder failed near t = {t}: {msg}")]
    Convergence { t: f64, msg: String },

    #[error("quadrature did not converge for {what} (error estimate {estimate:e})")]
    Quadrature { what: String, estimate: f64 },

    #[error("grid resolution: {0}")]
    GridResolution(String),

    #[error("alias budget violated: {0}")]
    AliasBudget(String),

    #[error("scale error: {0}")]
    Scale(String),

    #[error("cache file {path}: format version {found}, expected {expected}")]
    CacheVersion {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("cache file {path}: {msg}")]
    CacheFormat { path: PathBuf, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
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
