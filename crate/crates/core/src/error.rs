use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("CoNLL-U line {line}: {message}")]
    Conllu { line: usize, message: String },

    #[error("question has no WDT/WRB/WP token; treat the whole question with the self-word policy instead")]
    NoQuestionWord,

    #[error("{0}")]
    Contract(String),

    #[error("document for {url} was not supplied")]
    MissingDocument { url: String },

    #[error("question {id} has no snippets or documents to build a context from")]
    EmptyContext { id: String },

    #[error("offline mode and no cached copy of {url}")]
    OfflineCacheMiss { url: String },

    #[error("unknown preset {name:?}; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("invalid n-best document: {}", .0.join("; "))]
    InvalidNBest(Vec<String>),

    #[error("adapter failed: {0}")]
    Adapter(String),

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
