use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: cannot parse {cell:?} as a finite real")]
    Parse { row: usize, cell: String },

    #[error("column {0} is empty")]
    EmptyColumn(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate scale: min {min} equals max {max}")]
    DegenerateScale { min: f64, max: f64 },

    #[error("series too short: need more than {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numeric failure at iteration {iteration}: {what}")]
    Numeric { iteration: usize, what: String },

    #[error("metric undefined: actual value at index {index} is zero")]
    ZeroActual { index: usize },

    #[error("model has not been trained")]
    Untrained,

    #[error("run with seed {seed} failed: {source}")]
    Run {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
