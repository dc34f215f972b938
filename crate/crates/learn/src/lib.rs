//! Classifiers, Boruta feature selection, TPE hyperparameter search and the
//! subject-wise 10×3 nested cross-validation driver.
//!
//! The high-ECog group is the positive class throughout.

pub mod audit;
pub mod binning;
pub mod boruta;
pub mod cv;
pub mod error;
pub mod folds;
pub mod forest;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod space;
pub mod tpe;

pub use audit::{audit, AccessLog, AccessObserver, LeakageAudit, NoAudit, Stage};
pub use boruta::{boruta_select, BorutaConfig, BorutaResult, Decision};
pub use cv::{design_matrix, evaluate_algorithms, nested_cv, nested_cv_observed, refit_outer, CvOptions, EvalReport, Objective};
pub use error::{LearnError, Result};
pub use folds::{make_fold_plan, FoldPlan};
pub use matrix::Matrix;
pub use metrics::{Confusion, Metrics};
pub use models::{fit, Algorithm, TrainedModel};
pub use space::{Config, HyperSpace, Value};
pub use tpe::{tpe_suggest, TpeConfig};
