//! Cross-fold selection frequency and the overlap between two conditions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use voxmark_learn::EvalReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrequency {
    pub name: String,
    pub folds_selected: usize,
    pub n_folds: usize,
    pub frequency: f64,
    /// Selected in more than half of the folds.
    pub robust: bool,
    /// Mean |Shapley value| over all samples, when attributions were computed.
    pub mean_abs_shapley: Option<f64>,
}

/// Frequencies in descending order; ties keep the order of `feature_names`.
pub fn selection_frequency_from(selected: &[Vec<String>], feature_names: &[String]) -> Vec<FeatureFrequency> {
    let n_folds = selected.len();
    let sets: Vec<HashSet<&str>> = selected.iter().map(|f| f.iter().map(|s| s.as_str()).collect()).collect();
    let mut out: Vec<FeatureFrequency> = feature_names
        .iter()
        .map(|name| {
            let k = sets.iter().filter(|s| s.contains(name.as_str())).count();
            let frequency = if n_folds == 0 { 0.0 } else { k as f64 / n_folds as f64 };
            FeatureFrequency {
                name: name.clone(),
                folds_selected: k,
                n_folds,
                frequency,
                robust: 2 * k > n_folds,
                mean_abs_shapley: None,
            }
        })
        .collect();
    // Stable sort keeps the input order among ties.
    out.sort_by(|a, b| b.folds_selected.cmp(&a.folds_selected));
    out
}

pub fn selection_frequency(report: &EvalReport, feature_names: &[String]) -> Vec<FeatureFrequency> {
    selection_frequency_from(&report.selected_per_fold(), feature_names)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonFeatures {
    /// Robust in both rankings, in the order of the first.
    pub features: Vec<String>,
    /// Share of the first condition's robust mean |Shapley| carried by the common set.
    pub fraction_a: f64,
    pub fraction_b: f64,
}

/// Without any attribution mass every robust feature weighs the same.
fn share(rank: &[FeatureFrequency], common: &HashSet<&str>) -> f64 {
    let robust: Vec<&FeatureFrequency> = rank.iter().filter(|f| f.robust).collect();
    let mass: f64 = robust.iter().map(|f| f.mean_abs_shapley.unwrap_or(0.0)).sum();
    let weight = |f: &FeatureFrequency| if mass > 0.0 { f.mean_abs_shapley.unwrap_or(0.0) } else { 1.0 };
    let all: f64 = robust.iter().map(|f| weight(f)).sum();
    let part: f64 = robust.iter().filter(|f| common.contains(f.name.as_str())).map(|f| weight(f)).sum();
    if all > 0.0 {
        part / all
    } else {
        0.0
    }
}

pub fn common_features(rank_a: &[FeatureFrequency], rank_b: &[FeatureFrequency]) -> CommonFeatures {
    let robust_b: HashSet<&str> = rank_b.iter().filter(|f| f.robust).map(|f| f.name.as_str()).collect();
    let features: Vec<String> =
        rank_a.iter().filter(|f| f.robust && robust_b.contains(f.name.as_str())).map(|f| f.name.clone()).collect();
    let set: HashSet<&str> = features.iter().map(|s| s.as_str()).collect();
    CommonFeatures { fraction_a: share(rank_a, &set), fraction_b: share(rank_b, &set), features }
}
