use std::path::PathBuf;

/// Broad failure class, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },

    #[error("line {line}: record {id:?} has negative quality {quality}")]
    NegativeQuality { line: usize, id: String, quality: f64 },

    #[error("pool is empty")]
    EmptyPool,

    #[error("embedding file: expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },

    #[error("embedding file line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("embedding row for label {label:?} is all zeros")]
    ZeroVector { label: String },

    #[error("label {label:?} has no embedding row")]
    MissingLabel { label: String },

    #[error("embedding file line {line}: {reason}")]
    MalformedEmbeddings { line: usize, reason: String },

    #[error("label normalization dropped every label")]
    EmptyVocabulary,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector length {found} does not match label count {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("budget {budget} is outside 1..={pool}")]
    InvalidBudget { budget: usize, pool: usize },

    #[error("instance too large for enumeration: {subsets} subsets exceed the limit of {limit}")]
    InstanceTooLarge { subsets: u128, limit: u128 },

    #[error("graph artifact line {line}: {reason}")]
    MalformedArtifact { line: usize, reason: String },

    #[error("graph artifact format version {found} is not supported (expected {expected})")]
    ArtifactVersion { found: u32, expected: u32 },

    #[error("pool vocabulary hash {found} does not match graph artifact hash {expected}")]
    HashMismatch { expected: String, found: String },

    #[error("label {label:?} is not known to the graph artifact")]
    UnknownLabel { label: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Invariant(_) => ErrorKind::Internal,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
