//! Feature importance for nested cross-validation results: how often each
//! feature survives selection across outer folds, and Shapley attributions
//! of the per-fold models.

pub mod frequency;
pub mod report;
pub mod shapley;

pub use frequency::{common_features, selection_frequency, selection_frequency_from, CommonFeatures, FeatureFrequency};
pub use report::{explain_report, ExplainOptions, FeatureImportance, ImportanceReport, SampleAttribution};
pub use shapley::{exact_shapley, shapley_values, Attribution, FnModel, Model};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error(transparent)]
    Learn(#[from] voxmark_learn::LearnError),

    #[error("feature namespaces differ: {0}")]
    Namespace(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ExplainError> = std::result::Result<T, E>;
