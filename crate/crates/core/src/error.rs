use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{file}: parse error at offset {offset}: {message}")]
    Parse {
        file: String,
        offset: usize,
        message: String,
    },

    #[error("duplicate seed id `{0}`")]
    DuplicateSeed(String),

    #[error("nothing to trace: no pixel reaches the threshold")]
    NothingToTrace,

    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("instance {index}: {source}")]
    Instance {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("probe at {param}: {source}")]
    Probe {
        param: String,
        #[source]
        source: Box<Error>,
    },

    #[error("only {available} seeds behave correctly on the originals, {required} required")]
    SeedShortfall { available: usize, required: usize },

    #[error("operator {0} likely equivalent; MS undefined")]
    UndefinedScore(String),

    #[error("weak test set is empty: {0}")]
    EmptyWeakSet(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("config: {0}")]
    Config(String),

    #[error("missing artifacts: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingArtifacts(Vec<PathBuf>),

    #[error("refusing to overwrite {0} (use --force)")]
    WouldOverwrite(PathBuf),

    #[error("no surviving generation targets")]
    NoTargets,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
