use std::path::PathBuf;

use crate::env::Point3;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("{what} point {point} is not collision-free")]
    BlockedEndpoint { what: &'static str, point: Point3 },

    #[error("could only place {placed} of {requested} buildings after {rounds} rejection rounds")]
    Placement {
        placed: usize,
        requested: usize,
        rounds: usize,
    },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
