//! Crate-wide error type.

use crate::corpus::Modality;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    MalformedRecord { line: usize, msg: String },

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("expected {expected} source, got {found} (id {id})")]
    WrongModality {
        id: String,
        expected: Modality,
        found: Modality,
    },

    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown source id {0}")]
    UnknownSource(String),

    #[error("no {0} sources in corpus")]
    MissingModality(Modality),

    #[error("vector dims differ: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("non-finite vector component")]
    NonFiniteVector,

    #[error("need at least {needed} indexed sources, have {have}")]
    TooFewSources { needed: usize, have: usize },

    #[error("query is empty after tokenization")]
    EmptyQuery,

    #[error("template {template}: missing variable {var}")]
    MissingVariable { template: String, var: String },

    #[error("template {template}: {msg}")]
    BadTemplate { template: String, msg: String },

    #[error("unknown template {0}")]
    UnknownTemplate(String),

    #[error("provider does not support {0}")]
    Capability(String),

    #[error("transport: {0}")]
    Transport(String),

    #[error("backend integrity: {0}")]
    Integrity(String),

    #[error("empty verbalisation for image {0}")]
    EmptyVerbalisation(String),

    #[error("style {0}: {1}")]
    BadStyle(String, String),

    #[error("ranked lists have different labels")]
    LabelMismatch,

    #[error("gold set is empty")]
    EmptyGold,

    #[error("{0}")]
    InsufficientData(String),

    #[error("degenerate 2x2 table: every margin must be positive")]
    DegenerateTable,

    #[error("judge response has no valid score: {0}")]
    BadVerdict(String),

    #[error("missing predictions for: {0}")]
    MissingPredictions(String),

    #[error("config: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Transport errors are the only retryable class.
    pub fn is_transient(&self) -> bool {
        matches!(self, Error::Transport(_))
    }
}
