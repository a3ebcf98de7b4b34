use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sentence")]
    EmptySentence,

    #[error("{path}:{line}: malformed line (column {column}): {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("{path}:{line}: unknown tag `{tag}`")]
    UnknownTag {
        path: String,
        line: usize,
        tag: String,
    },

    #[error("unknown tag `{0}`")]
    UnknownTagName(String),

    #[error("spans overlap at token {0}")]
    OverlappingSpans(usize),

    #[error("span [{first}, {last}] out of bounds for {n_tokens} tokens")]
    SpanOutOfBounds {
        first: usize,
        last: usize,
        n_tokens: usize,
    },

    #[error("fraction {0} outside (0, 1)")]
    FractionOutOfRange(f64),

    #[error("reference set is empty")]
    EmptyReferenceSet,

    #[error("label length {labels} does not match token count {tokens} in sentence {sentence}")]
    LabelLengthMismatch {
        sentence: usize,
        tokens: usize,
        labels: usize,
    },

    #[error("sentence {0} has no labels")]
    UnlabeledSentence(usize),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("tag set mismatch: expected {expected}, found {found}")]
    ModelTagSetMismatch { expected: String, found: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait IoContext<T> {
    fn with_path(self, path: &std::path::Path) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn with_path(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
