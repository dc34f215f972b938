//! The five classifier families and the fitted preprocessing pipeline.

pub mod gbt;
pub mod knn;
pub mod logreg;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::matrix::{Imputer, Matrix, Scaler};
use crate::space::{Config, ConfigExt};
use crate::{LearnError, Result};

pub use gbt::{Booster, Gbt, GbtParams, Growth};
pub use knn::{Knn, KnnParams, Metric, Weights};
pub use logreg::{LogReg, LogRegParams, Penalty};
pub use svm::{Kernel, Svm, SvmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "knn")]
    Knn,
    #[serde(rename = "logreg")]
    LogReg,
    #[serde(rename = "svm")]
    Svm,
    /// Depth-wise second-order boosting (XGBoost-like).
    #[serde(rename = "gbt-a")]
    GbtA,
    /// Leaf-wise boosting (LightGBM-like).
    #[serde(rename = "gbt-b")]
    GbtB,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::LogReg, Algorithm::GbtA, Algorithm::GbtB, Algorithm::Svm, Algorithm::Knn];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Knn => "knn",
            Algorithm::LogReg => "logreg",
            Algorithm::Svm => "svm",
            Algorithm::GbtA => "gbt-a",
            Algorithm::GbtB => "gbt-b",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::Knn => "k-nearest neighbors",
            Algorithm::LogReg => "Logistic regression",
            Algorithm::Svm => "Support vector machine",
            Algorithm::GbtA => "Gradient boosting (XGBoost-like)",
            Algorithm::GbtB => "Gradient boosting (LightGBM-like)",
        }
    }

    /// Score above which a sample is called high.
    pub fn threshold(self) -> f64 {
        match self {
            Algorithm::Knn | Algorithm::LogReg => 0.5,
            Algorithm::Svm | Algorithm::GbtA | Algorithm::GbtB => 0.0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = LearnError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(Algorithm::Knn),
            "logreg" => Ok(Algorithm::LogReg),
            "svm" => Ok(Algorithm::Svm),
            "gbt-a" | "xgboost" => Ok(Algorithm::GbtA),
            "gbt-b" | "lightgbm" => Ok(Algorithm::GbtB),
            _ => Err(LearnError::UnknownAlgorithm(s.into())),
        }
    }
}

fn bad(name: &str, v: &str) -> LearnError {
    LearnError::InvalidParam { name: name.into(), message: format!("unsupported value `{v}`") }
}

pub fn knn_params(c: &Config) -> Result<KnnParams> {
    let k = c.int("n_neighbors")?;
    if k < 1 {
        return Err(LearnError::InvalidParam { name: "n_neighbors".into(), message: "must be ≥ 1".into() });
    }
    let weights = match c.cat("weights")? {
        "uniform" => Weights::Uniform,
        "distance" => Weights::Distance,
        v => return Err(bad("weights", v)),
    };
    let metric = match c.cat("metric")? {
        "euclidean" => Metric::Euclidean,
        "manhattan" => Metric::Manhattan,
        "minkowski" => Metric::Minkowski3,
        v => return Err(bad("metric", v)),
    };
    Ok(KnnParams { k: k as usize, weights, metric })
}

pub fn logreg_params(c: &Config) -> Result<LogRegParams> {
    let penalty = match c.cat("penalty")? {
        "l1" => Penalty::L1,
        "l2" => Penalty::L2,
        "elasticnet" => Penalty::ElasticNet(c.float("l1_ratio")?),
        "none" => Penalty::None,
        v => return Err(bad("penalty", v)),
    };
    Ok(LogRegParams { penalty, c: c.float("C")?, max_iter: 2000, tol: 1e-7 })
}

pub fn svm_params(c: &Config) -> Result<SvmParams> {
    let kernel = match c.cat("kernel")? {
        "linear" => Kernel::Linear,
        "rbf" => Kernel::Rbf { gamma: c.float("gamma")? },
        v => return Err(bad("kernel", v)),
    };
    Ok(SvmParams { kernel, c: c.float("C")?, tol: 1e-3, max_iter: 100_000 })
}

/// XGBoost-like preset: 100 rounds, depth-wise unless `lossguide`.
pub fn gbt_a_params(c: &Config) -> Result<GbtParams> {
    let booster = match c.cat("booster")? {
        "gbtree" => Booster::Tree,
        "gblinear" => Booster::Linear,
        "dart" => Booster::Dart,
        v => return Err(bad("booster", v)),
    };
    let growth = match c.cat("grow_policy")? {
        "depthwise" => Growth::DepthWise,
        "lossguide" => Growth::LeafWise,
        v => return Err(bad("grow_policy", v)),
    };
    let weighted_drop = match c.cat("sample_type")? {
        "uniform" => false,
        "weighted" => true,
        v => return Err(bad("sample_type", v)),
    };
    let forest_normalize = match c.cat("normalize_type")? {
        "tree" => false,
        "forest" => true,
        v => return Err(bad("normalize_type", v)),
    };
    Ok(GbtParams {
        booster,
        growth,
        n_rounds: 100,
        eta: c.float("eta")?,
        lambda: c.float("lambda")?,
        alpha: c.float("alpha")?,
        gamma: c.float("gamma")?,
        max_depth: Some(c.int("max_depth")? as usize),
        max_leaves: None,
        min_child_weight: c.float("min_child_weight")?,
        min_child_samples: 1,
        subsample: c.float("subsample")?,
        bagging_freq: 1,
        colsample: c.float("colsample_bytree")?,
        rate_drop: c.float("rate_drop")?,
        skip_drop: c.float("skip_drop")?,
        weighted_drop,
        forest_normalize,
        max_bins: 64,
    })
}

/// LightGBM-like preset: 100 rounds at learning rate 0.1, leaf-wise growth.
pub fn gbt_b_params(c: &Config) -> Result<GbtParams> {
    Ok(GbtParams {
        booster: Booster::Tree,
        growth: Growth::LeafWise,
        n_rounds: 100,
        eta: 0.1,
        lambda: c.float("lambda_l2")?,
        alpha: c.float("lambda_l1")?,
        gamma: 0.0,
        max_depth: None,
        max_leaves: Some(c.int("num_leaves")? as usize),
        min_child_weight: 1e-3,
        min_child_samples: c.int("min_child_samples")?.max(1) as usize,
        subsample: c.float("bagging_fraction")?,
        bagging_freq: c.int("bagging_freq")?.max(1) as usize,
        colsample: c.float("feature_fraction")?,
        rate_drop: 0.0,
        skip_drop: 0.0,
        weighted_drop: false,
        forest_normalize: false,
        max_bins: 64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Knn(Knn),
    LogReg(LogReg),
    Svm(Svm),
    Gbt(Gbt),
}

impl Classifier {
    pub fn fit(algorithm: Algorithm, x: &Matrix, y: &[bool], config: &Config, seed: u64) -> Result<Self> {
        if x.rows == 0 {
            return Err(LearnError::EmptyTraining);
        }
        if y.iter().all(|&b| b) {
            return Err(LearnError::SingleClass("high"));
        }
        if !y.iter().any(|&b| b) {
            return Err(LearnError::SingleClass("low"));
        }
        Ok(match algorithm {
            Algorithm::Knn => Classifier::Knn(Knn::fit(x, y, knn_params(config)?)),
            Algorithm::LogReg => Classifier::LogReg(LogReg::fit(x, y, logreg_params(config)?)),
            Algorithm::Svm => Classifier::Svm(Svm::fit(x, y, svm_params(config)?)),
            Algorithm::GbtA => Classifier::Gbt(Gbt::fit(x, y, &gbt_a_params(config)?, seed)),
            Algorithm::GbtB => Classifier::Gbt(Gbt::fit(x, y, &gbt_b_params(config)?, seed)),
        })
    }

    /// High-vote fraction, probability, or margin depending on the family.
    pub fn decision(&self, row: &[f64]) -> f64 {
        match self {
            Classifier::Knn(m) => m.decision(row),
            Classifier::LogReg(m) => m.probability(row),
            Classifier::Svm(m) => m.decision(row),
            Classifier::Gbt(m) => m.margin(row),
        }
    }
}

/// A fitted pipeline: impute → select → standardize → classify.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub algorithm: Algorithm,
    pub config: Config,
    pub feature_names: Vec<String>,
    /// Columns of the input the classifier sees.
    pub selected: Vec<usize>,
    pub imputer: Imputer,
    /// Statistics of the selected columns.
    pub scaler: Scaler,
    pub classifier: Classifier,
    pub threshold: f64,
}

impl TrainedModel {
    /// Decision score for one full-width input row (NaN = missing).
    pub fn output(&self, row: &[f64]) -> f64 {
        let mut z: Vec<f64> = self
            .selected
            .iter()
            .map(|&j| if row[j].is_nan() { self.imputer.medians[j] } else { row[j] })
            .collect();
        self.scaler.apply_row(&mut z);
        self.classifier.decision(&z)
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.output(row) > self.threshold
    }

    pub fn selected_names(&self) -> Vec<String> {
        self.selected.iter().map(|&j| self.feature_names[j].clone()).collect()
    }
}

/// Fits the whole pipeline on `x` (NaN = missing) with a caller-fixed
/// feature subset.
pub fn fit(
    algorithm: Algorithm,
    x: &Matrix,
    y: &[bool],
    feature_names: &[String],
    selected: &[usize],
    config: &Config,
    seed: u64,
) -> Result<TrainedModel> {
    let imputer = Imputer::fit(x);
    let mut xi = x.clone();
    imputer.apply(&mut xi);
    fit_imputed(algorithm, &xi, y, feature_names, imputer, selected, config, seed)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn fit_imputed(
    algorithm: Algorithm,
    xi: &Matrix,
    y: &[bool],
    feature_names: &[String],
    imputer: Imputer,
    selected: &[usize],
    config: &Config,
    seed: u64,
) -> Result<TrainedModel> {
    let mut xs = xi.select_cols(selected);
    let scaler = Scaler::fit(&xs);
    scaler.apply(&mut xs);
    let classifier = Classifier::fit(algorithm, &xs, y, config, seed)?;
    Ok(TrainedModel {
        algorithm,
        config: config.clone(),
        feature_names: feature_names.to_vec(),
        selected: selected.to_vec(),
        imputer,
        scaler,
        classifier,
        threshold: algorithm.threshold(),
    })
}
