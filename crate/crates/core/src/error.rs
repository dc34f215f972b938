use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the core toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("wav error on {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("no records")]
    NoRecords,

    #[error("row {row}, field `{field}`: {message}")]
    Manifest { row: usize, field: String, message: String },

    #[error("duplicate response for participant `{participant}`, question `{question}`")]
    DuplicateRecord { participant: String, question: String },

    #[error("ecog_score out of range: {0} (expected 1..=4)")]
    EcogOutOfRange(f64),

    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),

    #[error("zero-length audio")]
    EmptyAudio,

    #[error("invalid audio clip: {0}")]
    InvalidClip(String),

    #[error("no voiced content")]
    NoVoicedContent,

    #[error("clip too short: {got} samples, need at least {needed}")]
    TooShort { needed: usize, got: usize },

    #[error("derivative order must be 1 or 2, got {0}")]
    InvalidDerivativeOrder(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("statistic undefined: {0}")]
    Undefined(String),

    #[error("rank-deficient design: collinear columns {0:?}")]
    RankDeficient(Vec<String>),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
