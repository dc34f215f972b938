//! Nested cross-validation: Boruta and TPE tuned on inner folds, scored on
//! pooled outer-test predictions.

use std::collections::BTreeMap;
use std::io::Write;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use voxmark_core::features::Dataset;
use voxmark_core::seed::{derive_seed, tag};

use crate::audit::{AccessObserver, NoAudit, Stage};
use crate::boruta::{boruta_select, BorutaConfig};
use crate::folds::{FoldPlan, INNER_FOLDS};
use crate::matrix::{Imputer, Matrix};
use crate::metrics::{Confusion, Metrics};
use crate::models::{fit_imputed, Algorithm, TrainedModel};
use crate::space::{Config, ConfigExt, HyperSpace, BORUTA_PERC, BORUTA_TREES};
use crate::tpe::{tpe_suggest, TpeConfig};
use crate::{LearnError, Result};

/// Inner-loop score that TPE maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Accuracy,
    F1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvOptions {
    /// TPE trials per outer fold.
    pub budget: usize,
    pub objective: Objective,
    /// Base Boruta settings; `perc` and `n_trees` are overridden per trial.
    pub boruta: BorutaConfig,
    pub tpe_startup: usize,
    pub tpe_candidates: usize,
    pub tpe_gamma: f64,
}

impl Default for CvOptions {
    fn default() -> Self {
        let t = TpeConfig::default();
        CvOptions {
            budget: 50,
            objective: Objective::Accuracy,
            boruta: BorutaConfig::default(),
            tpe_startup: t.n_startup,
            tpe_candidates: t.n_candidates,
            tpe_gamma: t.gamma,
        }
    }
}

impl CvOptions {
    fn tpe(&self) -> TpeConfig {
        TpeConfig { n_startup: self.tpe_startup, gamma: self.tpe_gamma, n_candidates: self.tpe_candidates }
    }
}

/// The Boruta settings searched jointly with the classifier.
pub const BORUTA_GRID: [(u32, usize); 6] = [(80, 100), (80, 300), (90, 100), (90, 300), (100, 100), (100, 300)];

/// Dataset rows as a matrix with NaN for missing cells.
pub fn design_matrix(dataset: &Dataset) -> Matrix {
    let p = dataset.n_features();
    let mut data = Vec::with_capacity(dataset.n_samples() * p);
    for s in &dataset.samples {
        data.extend(s.values.iter().map(|v| v.unwrap_or(f64::NAN)));
    }
    Matrix::new(dataset.n_samples(), p, data)
}

/// Gathers training rows for one stage and reports the read.
struct View<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    fold: usize,
    observer: &'a dyn AccessObserver,
}

impl View<'_> {
    fn read(&self, stage: Stage, rows: &[usize]) -> (Matrix, Vec<bool>) {
        self.observer.record(self.fold, stage, rows);
        (self.x.select_rows(rows), rows.iter().map(|&r| self.y[r]).collect())
    }

    fn imputed(&self, rows: &[usize]) -> (Matrix, Imputer) {
        let (mut x, _) = self.read(Stage::Imputation, rows);
        let imp = Imputer::fit(&x);
        imp.apply(&mut x);
        (x, imp)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Selection {
    columns: Vec<usize>,
    fallback: bool,
}

/// Boruta results for every (outer fold, slot, grid entry); slot
/// `INNER_FOLDS` is the full outer-training set.
pub struct SelectionCache {
    entries: BTreeMap<(usize, usize, usize), Selection>,
}

fn grid_index(config: &Config) -> Result<usize> {
    let perc = config.int(BORUTA_PERC)? as u32;
    let trees = config.int(BORUTA_TREES)? as usize;
    BORUTA_GRID.iter().position(|&g| g == (perc, trees)).ok_or_else(|| LearnError::InvalidParam {
        name: BORUTA_PERC.into(),
        message: format!("({perc}, {trees}) is not a searched Boruta setting"),
    })
}

fn slot_rows(plan: &FoldPlan, dataset: &Dataset, k: usize, slot: usize) -> Vec<usize> {
    if slot == INNER_FOLDS {
        plan.outer_rows(dataset, k).0
    } else {
        plan.inner_rows(dataset, k, slot).0
    }
}

impl SelectionCache {
    pub fn build(
        dataset: &Dataset,
        x: &Matrix,
        plan: &FoldPlan,
        base: &BorutaConfig,
        seed: u64,
        observer: &dyn AccessObserver,
    ) -> Self {
        let y = dataset.labels();
        let tasks: Vec<(usize, usize, usize)> = (0..plan.n_outer())
            .flat_map(|k| (0..=INNER_FOLDS).flat_map(move |s| (0..BORUTA_GRID.len()).map(move |g| (k, s, g))))
            .collect();
        let results: Vec<Selection> = tasks
            .par_iter()
            .map(|&(k, s, g)| {
                let view = View { x, y: &y, fold: k, observer };
                let rows = slot_rows(plan, dataset, k, s);
                let (xi, _) = view.imputed(&rows);
                let (_, yt) = view.read(Stage::Selection, &rows);
                let (perc, trees) = BORUTA_GRID[g];
                let cfg = BorutaConfig { perc: perc as f64, n_trees: trees, ..*base };
                // Seeds depend on the setting, not on the trial that asks for it.
                let bseed = derive_seed(seed, &[tag("boruta"), k as u64, s as u64, perc as u64, trees as u64]);
                let columns = boruta_select(&xi, &yt, &cfg, bseed).confirmed();
                if columns.is_empty() {
                    warn!("outer fold {k}, slot {s}: Boruta confirmed nothing, using all features");
                    Selection { columns: (0..x.cols).collect(), fallback: true }
                } else {
                    Selection { columns, fallback: false }
                }
            })
            .collect();
        SelectionCache { entries: tasks.into_iter().zip(results).collect() }
    }

    fn get(&self, k: usize, slot: usize, config: &Config) -> Result<&Selection> {
        let g = grid_index(config)?;
        Ok(&self.entries[&(k, slot, g)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub row: usize,
    pub participant_id: String,
    pub question_id: Option<String>,
    pub fold: usize,
    pub score: f64,
    pub predicted_high: bool,
    pub actual_high: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub test_participants: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: Confusion,
    pub metrics: Metrics,
    pub selected: Vec<String>,
    pub boruta_fallback: bool,
    pub config: Config,
    /// Best inner loss (1 − mean inner score).
    pub inner_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: Algorithm,
    pub mode: String,
    pub seed: u64,
    pub budget: usize,
    pub objective: Objective,
    pub n_samples: usize,
    pub n_participants: usize,
    /// Pooled over all outer-test samples.
    pub confusion: Confusion,
    pub metrics: Metrics,
    /// One call per participant from the mean test score of their samples.
    pub participant_confusion: Confusion,
    pub participant_metrics: Metrics,
    pub folds: Vec<FoldReport>,
    pub predictions: Vec<Prediction>,
}

impl EvalReport {
    /// Checks that stored metrics follow from the stored counts.
    pub fn verify(&self) -> bool {
        let mut pooled = Confusion::default();
        for f in &self.folds {
            if f.metrics != f.confusion.metrics() {
                return false;
            }
            pooled += f.confusion;
        }
        pooled == self.confusion
            && self.metrics == self.confusion.metrics()
            && self.participant_metrics == self.participant_confusion.metrics()
    }

    pub fn selected_per_fold(&self) -> Vec<Vec<String>> {
        self.folds.iter().map(|f| f.selected.clone()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Writes a result-table-shaped summary, one row per report.
pub fn write_summary_csv<W: Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "algorithm", "model", "ACC", "SEN", "SPE", "F1", "TP", "FN", "TN", "FP", "participant_ACC"])?;
    for r in reports {
        let m = r.metrics.rounded();
        let c = r.confusion;
        w.write_record([
            r.mode.clone(),
            r.algorithm.id().to_string(),
            r.algorithm.display_name().to_string(),
            format!("{:.1}", m[0]),
            format!("{:.1}", m[1]),
            format!("{:.1}", m[2]),
            format!("{:.1}", m[3]),
            c.tp.to_string(),
            c.fn_.to_string(),
            c.tn.to_string(),
            c.fp.to_string(),
            format!("{:.1}", r.participant_metrics.rounded()[0]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn score(objective: Objective, c: &Confusion) -> f64 {
    let m = c.metrics();
    match objective {
        Objective::Accuracy => m.accuracy / 100.0,
        Objective::F1 => m.f1 / 100.0,
    }
}

struct Context<'a> {
    dataset: &'a Dataset,
    x: Matrix,
    y: Vec<bool>,
    plan: &'a FoldPlan,
    cache: &'a SelectionCache,
    options: &'a CvOptions,
    seed: u64,
    observer: &'a dyn AccessObserver,
}

fn final_seed(seed: u64, algorithm: Algorithm, k: usize) -> u64 {
    derive_seed(seed, &[tag("final"), tag(algorithm.id()), k as u64])
}

impl Context<'_> {
    fn view(&self, k: usize) -> View<'_> {
        View { x: &self.x, y: &self.y, fold: k, observer: self.observer }
    }

    /// Fits the pipeline on `train` with a cached selection.
    fn fit_on(&self, algorithm: Algorithm, k: usize, train: &[usize], sel: &[usize], config: &Config, seed: u64) -> Result<TrainedModel> {
        let view = self.view(k);
        let (xi, imputer) = view.imputed(train);
        view.read(Stage::Standardization, train);
        let (_, yt) = view.read(Stage::Training, train);
        fit_imputed(algorithm, &xi, &yt, &self.dataset.feature_names, imputer, sel, config, seed)
    }

    fn inner_loss(&self, algorithm: Algorithm, k: usize, trial: usize, config: &Config) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..INNER_FOLDS {
            let (train, val) = self.plan.inner_rows(self.dataset, k, i);
            let sel = &self.cache.get(k, i, config)?.columns;
            let s = derive_seed(self.seed, &[tag("inner"), tag(algorithm.id()), k as u64, trial as u64, i as u64]);
            let model = self.fit_on(algorithm, k, &train, sel, config, s)?;
            let (xv, yv) = self.view(k).read(Stage::Tuning, &val);
            let pred: Vec<bool> = (0..xv.rows).map(|r| model.predict(xv.row(r))).collect();
            total += score(self.options.objective, &Confusion::from_predictions(&yv, &pred));
        }
        Ok(1.0 - total / INNER_FOLDS as f64)
    }

    fn outer_fold(&self, algorithm: Algorithm, k: usize) -> Result<(FoldReport, Vec<Prediction>)> {
        let space = HyperSpace::with_boruta(algorithm);
        let tpe_seed = derive_seed(self.seed, &[tag("tpe"), tag(algorithm.id()), k as u64]);
        let mut history: Vec<(Config, f64)> = Vec::with_capacity(self.options.budget);
        for trial in 0..self.options.budget.max(1) {
            let config = tpe_suggest(&history, &space, tpe_seed, &self.options.tpe());
            let loss = self.inner_loss(algorithm, k, trial, &config)?;
            history.push((config, loss));
        }
        let (config, inner_loss) = crate::tpe::best(&history).cloned().expect("at least one trial");

        let (train, test) = self.plan.outer_rows(self.dataset, k);
        let sel = self.cache.get(k, INNER_FOLDS, &config)?;
        let model = self.fit_on(algorithm, k, &train, &sel.columns, &config, final_seed(self.seed, algorithm, k))?;
        let (xt, yt) = self.view(k).read(Stage::Evaluation, &test);
        let mut preds = Vec::with_capacity(test.len());
        for (r, &row) in test.iter().enumerate() {
            let score = model.output(xt.row(r));
            let s = &self.dataset.samples[row];
            preds.push(Prediction {
                row,
                participant_id: s.participant_id.clone(),
                question_id: s.question_id.clone(),
                fold: k,
                score,
                predicted_high: score > model.threshold,
                actual_high: yt[r],
            });
        }
        let actual: Vec<bool> = preds.iter().map(|p| p.actual_high).collect();
        let called: Vec<bool> = preds.iter().map(|p| p.predicted_high).collect();
        let confusion = Confusion::from_predictions(&actual, &called);
        Ok((
            FoldReport {
                fold: k,
                test_participants: self.plan.outer[k].clone(),
                n_train: train.len(),
                n_test: test.len(),
                confusion,
                metrics: confusion.metrics(),
                selected: model.selected_names(),
                boruta_fallback: sel.fallback,
                config,
                inner_loss,
            },
            preds,
        ))
    }

    fn run(&self, algorithm: Algorithm) -> Result<EvalReport> {
        let folds: Vec<Result<(FoldReport, Vec<Prediction>)>> =
            (0..self.plan.n_outer()).into_par_iter().map(|k| self.outer_fold(algorithm, k)).collect();
        let mut reports = Vec::new();
        let mut predictions = Vec::new();
        for (k, f) in folds.into_iter().enumerate() {
            let (r, p) = f.map_err(|e| LearnError::Fold { fold: k, source: Box::new(e) })?;
            reports.push(r);
            predictions.extend(p);
        }
        predictions.sort_by_key(|p| p.row);
        let mut confusion = Confusion::default();
        for r in &reports {
            confusion += r.confusion;
        }
        let threshold = algorithm.threshold();
        let mut per: BTreeMap<&str, (f64, usize, bool)> = BTreeMap::new();
        for p in &predictions {
            let e = per.entry(p.participant_id.as_str()).or_insert((0.0, 0, p.actual_high));
            e.0 += p.score;
            e.1 += 1;
        }
        let (pa, pc): (Vec<bool>, Vec<bool>) = per.values().map(|&(s, n, a)| (a, s / n as f64 > threshold)).unzip();
        let participant_confusion = Confusion::from_predictions(&pa, &pc);
        Ok(EvalReport {
            algorithm,
            mode: self.dataset.mode.to_string(),
            seed: self.seed,
            budget: self.options.budget,
            objective: self.options.objective,
            n_samples: self.dataset.n_samples(),
            n_participants: per.len(),
            confusion,
            metrics: confusion.metrics(),
            participant_confusion,
            participant_metrics: participant_confusion.metrics(),
            folds: reports,
            predictions,
        })
    }
}

/// Evaluates several algorithms on one plan, sharing the Boruta runs.
pub fn evaluate_algorithms(
    dataset: &Dataset,
    algorithms: &[Algorithm],
    plan: &FoldPlan,
    options: &CvOptions,
    seed: u64,
    observer: &dyn AccessObserver,
) -> Result<Vec<EvalReport>> {
    plan.check(dataset)?;
    let x = design_matrix(dataset);
    let cache = SelectionCache::build(dataset, &x, plan, &options.boruta, seed, observer);
    let ctx = Context { dataset, y: dataset.labels(), x, plan, cache: &cache, options, seed, observer };
    algorithms.iter().map(|&a| ctx.run(a)).collect()
}

pub fn nested_cv(dataset: &Dataset, algorithm: Algorithm, plan: &FoldPlan, options: &CvOptions, seed: u64) -> Result<EvalReport> {
    nested_cv_observed(dataset, algorithm, plan, options, seed, &NoAudit)
}

pub fn nested_cv_observed(
    dataset: &Dataset,
    algorithm: Algorithm,
    plan: &FoldPlan,
    options: &CvOptions,
    seed: u64,
    observer: &dyn AccessObserver,
) -> Result<EvalReport> {
    Ok(evaluate_algorithms(dataset, &[algorithm], plan, options, seed, observer)?.remove(0))
}

/// Rebuilds the model an outer fold used for its test predictions.
pub fn refit_outer(dataset: &Dataset, plan: &FoldPlan, report: &EvalReport, k: usize) -> Result<TrainedModel> {
    let fold = report.folds.get(k).ok_or_else(|| LearnError::PlanMismatch(format!("report has no fold {k}")))?;
    let selected: Vec<usize> = fold
        .selected
        .iter()
        .map(|n| {
            dataset
                .feature_names
                .iter()
                .position(|f| f == n)
                .ok_or_else(|| LearnError::PlanMismatch(format!("feature `{n}` not in dataset")))
        })
        .collect::<Result<_>>()?;
    let x = design_matrix(dataset);
    let y = dataset.labels();
    let (train, _) = plan.outer_rows(dataset, k);
    let mut xt = x.select_rows(&train);
    let yt: Vec<bool> = train.iter().map(|&r| y[r]).collect();
    let imputer = Imputer::fit(&xt);
    imputer.apply(&mut xt);
    fit_imputed(
        report.algorithm,
        &xt,
        &yt,
        &dataset.feature_names,
        imputer,
        &selected,
        &fold.config,
        final_seed(report.seed, report.algorithm, k),
    )
}
