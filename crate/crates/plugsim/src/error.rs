use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{source_name}: line {line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("{source_name}: bad column {index} {found:?}, expected {expected:?}")]
    Column {
        source_name: String,
        index: usize,
        found: String,
        expected: String,
    },

    #[error("{source_name}: {source}")]
    Json {
        source_name: String,
        source: serde_json::Error,
    },

    #[error("{source_name}: {source}")]
    Trace {
        source_name: String,
        source: plugsim_core::Error,
    },

    #[error(transparent)]
    Core(#[from] plugsim_core::Error),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
