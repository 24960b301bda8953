use std::path::PathBuf;

use thiserror::Error;

/// Errors returned by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The carve boundary would split an energy shell and partial shells were disallowed,
    /// or the lattice enumeration could not reach the requested count.
    #[error("cannot carve exactly {target} points; shell populations (norm^2, count): {shells:?}")]
    CountUnreachable {
        target: usize,
        shells: Vec<(f64, usize)>,
    },

    #[error("invalid point count {count}: {reason}")]
    InvalidCount { count: usize, reason: String },

    #[error("constellation points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("points do not form a Cartesian product of two 2-D sets")]
    NotProduct,

    #[error("bits per symbol required for Eb/N0 conversion")]
    MissingBits,

    #[error("probability {0} outside [0, 1]")]
    DomainError(f64),

    #[error("curve never crosses target SER {target:e}{}", curve_label(.curve))]
    NoBracket { target: f64, curve: Option<String> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn curve_label(curve: &Option<String>) -> String {
    match curve {
        Some(name) => format!(" (curve `{name}`)"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
