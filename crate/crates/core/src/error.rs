use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading, validating or analysing embedding datasets.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: vector has dimension {found}, expected {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: vector component {index} is not finite")]
    NonFinite { line: usize, index: usize },

    #[error("line {line}: vector has zero norm")]
    ZeroNormRecord { line: usize },

    #[error("line {line}: duplicate occurrence_id {id:?}")]
    DuplicateId { line: usize, id: String },

    #[error("dataset header: {0}")]
    Header(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("selection is empty")]
    EmptySelection,

    #[error("label subset needs k >= 2, got {0}")]
    SubsetTooSmall(usize),

    #[error("requested {requested} labels but only {available} distinct labels exist")]
    NotEnoughLabels { requested: usize, available: usize },

    #[error("label {0:?} has no records")]
    MissingLabel(String),

    #[error("record {id:?} is unlabeled or carries a label outside the subset")]
    UnexpectedLabel { id: String },

    #[error("vectors have dimensions {left} and {right}")]
    DimensionConflict { left: usize, right: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distribution is not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("assignment does not cover record {0:?}")]
    Unassigned(String),

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("no dated records")]
    NoDatedRecords,

    #[error("fewer than two usable years")]
    NotEnoughYears,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
