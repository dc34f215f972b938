use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("too few participants: {0}")]
    TooFewParticipants(String),

    #[error("training data has a single class ({0})")]
    SingleClass(&'static str),

    #[error("empty training set")]
    EmptyTraining,

    #[error("invalid hyperparameter `{name}`: {message}")]
    InvalidParam { name: String, message: String },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("fold plan does not match the dataset: {0}")]
    PlanMismatch(String),

    #[error("outer fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<LearnError>,
    },

    #[error(transparent)]
    Core(#[from] voxmark_core::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LearnError> = std::result::Result<T, E>;
