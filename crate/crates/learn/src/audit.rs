//! Row-access instrumentation for the cross-validation driver.

use std::collections::HashSet;
use std::sync::Mutex;

use serde::Serialize;
use voxmark_core::features::Dataset;

use crate::folds::FoldPlan;

/// Pipeline stage that read a block of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Stage {
    Imputation,
    Selection,
    Standardization,
    Tuning,
    Training,
    Evaluation,
}

impl Stage {
    /// Stages that must never see the outer test participants.
    pub fn is_fitting(self) -> bool {
        !matches!(self, Stage::Evaluation)
    }
}

/// Receives every block of dataset rows the driver reads.
pub trait AccessObserver: Sync {
    fn record(&self, outer_fold: usize, stage: Stage, rows: &[usize]);
}

/// Ignores all reads.
pub struct NoAudit;

impl AccessObserver for NoAudit {
    fn record(&self, _: usize, _: Stage, _: &[usize]) {}
}

/// Collects every read for later inspection.
#[derive(Default)]
pub struct AccessLog {
    entries: Mutex<Vec<(usize, Stage, Vec<usize>)>>,
}

impl AccessLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> Vec<(usize, Stage, Vec<usize>)> {
        let mut e = self.entries.lock().expect("access log poisoned").clone();
        e.sort();
        e
    }
}

impl AccessObserver for AccessLog {
    fn record(&self, outer_fold: usize, stage: Stage, rows: &[usize]) {
        self.entries.lock().expect("access log poisoned").push((outer_fold, stage, rows.to_vec()));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageAudit {
    /// Reads of outer-test rows during fitting stages.
    pub violations: usize,
    /// Rows read during fitting stages, summed over all entries.
    pub fitting_reads: usize,
    /// Outer folds that recorded at least one fitting read.
    pub folds_seen: usize,
    /// Stages observed per fold, to show every stage was instrumented.
    pub stages: Vec<Vec<Stage>>,
}

impl LeakageAudit {
    pub fn clean(&self) -> bool {
        self.violations == 0
    }
}

/// Cross-checks the log against the plan.
pub fn audit(log: &AccessLog, plan: &FoldPlan, dataset: &Dataset) -> LeakageAudit {
    let mut violations = 0;
    let mut fitting_reads = 0;
    let mut stages = vec![Vec::new(); plan.n_outer()];
    let entries = log.entries();
    for (k, stage, rows) in &entries {
        let test: HashSet<&str> = plan.outer[*k].iter().map(|s| s.as_str()).collect();
        if !stages[*k].contains(stage) {
            stages[*k].push(*stage);
        }
        if stage.is_fitting() {
            fitting_reads += rows.len();
            violations += rows.iter().filter(|&&r| test.contains(dataset.samples[r].participant_id.as_str())).count();
        }
    }
    for s in &mut stages {
        s.sort();
    }
    let folds_seen = stages.iter().filter(|s| s.iter().any(|st| st.is_fitting())).count();
    LeakageAudit { violations, fitting_reads, folds_seen, stages }
}
