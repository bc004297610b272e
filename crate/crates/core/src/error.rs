use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{field}: expected {expected}, found {found}")]
    Dimension {
        field: &'static str,
        expected: String,
        found: String,
    },

    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("synthetic template needs at least 100 vertices, got v_target = {0}")]
    TooFewVertices(usize),

    #[error("eye projections coincide (separation {separation:e} m); the pose is too close to profile to solve a scale")]
    DegenerateEyes { separation: f64 },

    #[error("resolution mismatch: {0}")]
    ResolutionMismatch(String),

    #[error("mesh has no UV coordinates")]
    MissingUv,

    #[error("batch of {0} parameter sets is too small to interpolate (need at least 2)")]
    BatchTooSmall(usize),

    #[error("output directory {0} is not empty (pass --force to overwrite)")]
    OutputExists(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn dim(field: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            field,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem rather than by the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::OutputExists(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
