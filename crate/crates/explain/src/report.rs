//! Per-fold attribution of a nested cross-validation result.

use std::io::Write;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use voxmark_core::features::Dataset;
use voxmark_core::seed::{derive_seed, rng_for, tag};
use voxmark_learn::{design_matrix, refit_outer, Algorithm, EvalReport, FoldPlan};

use crate::frequency::{selection_frequency, FeatureFrequency};
use crate::shapley::shapley_values;
use crate::{ExplainError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainOptions {
    pub n_permutations: usize,
    /// Training rows per fold used as the background set.
    pub n_background: usize,
    pub seed: u64,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        ExplainOptions { n_permutations: 200, n_background: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleAttribution {
    pub row: usize,
    pub participant_id: String,
    pub question_id: Option<String>,
    pub fold: usize,
    pub output: f64,
    pub base_value: f64,
    pub values: Vec<f64>,
    pub sum_std_error: f64,
    pub local_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    pub mean_abs_shapley: f64,
    pub selection_frequency: f64,
    pub robust: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub algorithm: Algorithm,
    pub mode: String,
    pub options: ExplainOptions,
    pub feature_names: Vec<String>,
    /// Selection frequencies in ranked order, with mean |Shapley| filled in.
    pub frequencies: Vec<FeatureFrequency>,
    pub samples: Vec<SampleAttribution>,
}

impl ImportanceReport {
    /// Robust features by descending mean |Shapley|; ties keep column order.
    pub fn ranking(&self) -> Vec<FeatureImportance> {
        let mut v: Vec<FeatureImportance> = self
            .feature_names
            .iter()
            .filter_map(|n| self.frequencies.iter().find(|f| &f.name == n))
            .filter(|f| f.robust)
            .map(|f| FeatureImportance {
                name: f.name.clone(),
                mean_abs_shapley: f.mean_abs_shapley.unwrap_or(0.0),
                selection_frequency: f.frequency,
                robust: f.robust,
            })
            .collect();
        v.sort_by(|a, b| b.mean_abs_shapley.total_cmp(&a.mean_abs_shapley));
        v
    }

    /// All features by descending mean |Shapley|.
    pub fn by_importance(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = self
            .feature_names
            .iter()
            .map(|n| {
                let m = self.frequencies.iter().find(|f| &f.name == n).and_then(|f| f.mean_abs_shapley).unwrap_or(0.0);
                (n.clone(), m)
            })
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }

    /// One row per feature, one column per sample.
    pub fn write_attributions_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["feature".to_string()];
        header.extend(self.samples.iter().map(|s| match &s.question_id {
            Some(q) => format!("{}:{}", s.participant_id, q),
            None => s.participant_id.clone(),
        }));
        w.write_record(&header)?;
        for (j, name) in self.feature_names.iter().enumerate() {
            let mut rec = vec![name.clone()];
            rec.extend(self.samples.iter().map(|s| format!("{}", s.values[j])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Refits each outer fold's model and attributes its test predictions
/// against a background drawn from that fold's training rows.
pub fn explain_report(dataset: &Dataset, plan: &FoldPlan, report: &EvalReport, options: &ExplainOptions) -> Result<ImportanceReport> {
    for f in &report.folds {
        if let Some(bad) = f.selected.iter().find(|n| !dataset.feature_names.contains(n)) {
            return Err(ExplainError::Namespace(format!("`{bad}` is not a column of the dataset")));
        }
    }
    plan.check(dataset)?;
    let x = design_matrix(dataset);
    let mut samples = Vec::with_capacity(dataset.n_samples());
    for k in 0..plan.n_outer() {
        let model = refit_outer(dataset, plan, report, k)?;
        let (train, test) = plan.outer_rows(dataset, k);
        let complete = |r: usize| {
            let mut v = x.row(r).to_vec();
            model.imputer.apply_row(&mut v);
            v
        };
        let mut rng = rng_for(options.seed, &[tag("background"), k as u64]);
        let mut pick = sample(&mut rng, train.len(), options.n_background.min(train.len())).into_vec();
        pick.sort_unstable();
        let background: Vec<Vec<f64>> = pick.iter().map(|&i| complete(train[i])).collect();
        let data: Vec<Vec<f64>> = test.iter().map(|&r| complete(r)).collect();
        let seed = derive_seed(options.seed, &[tag("fold"), k as u64]);
        let a = shapley_values(&model, &data, &background, options.n_permutations, seed)?;
        for (i, &r) in test.iter().enumerate() {
            let s = &dataset.samples[r];
            samples.push(SampleAttribution {
                row: r,
                participant_id: s.participant_id.clone(),
                question_id: s.question_id.clone(),
                fold: k,
                output: a.outputs[i],
                base_value: a.base_value,
                values: a.values[i].clone(),
                sum_std_error: a.sum_std_errors[i],
                local_gap: a.local_gap(i),
            });
        }
    }
    samples.sort_by_key(|s| s.row);
    let n = samples.len().max(1) as f64;
    let mut frequencies = selection_frequency(report, &dataset.feature_names);
    for f in &mut frequencies {
        let j = dataset.feature_names.iter().position(|n| n == &f.name).expect("name from dataset");
        f.mean_abs_shapley = Some(samples.iter().map(|s| s.values[j].abs()).sum::<f64>() / n);
    }
    Ok(ImportanceReport {
        algorithm: report.algorithm,
        mode: report.mode.clone(),
        options: *options,
        feature_names: dataset.feature_names.clone(),
        frequencies,
        samples,
    })
}
