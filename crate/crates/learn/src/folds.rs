//! Subject-wise stratified fold plans.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use voxmark_core::features::Dataset;
use voxmark_core::seed::{rng_for, tag};

use crate::{LearnError, Result};

pub const OUTER_FOLDS: usize = 10;
pub const INNER_FOLDS: usize = 3;

/// Outer test folds and, for each, the inner validation folds over its
/// training participants. Participants are identified by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub outer: Vec<Vec<String>>,
    pub inner: Vec<Vec<Vec<String>>>,
    pub seed: u64,
}

/// Splits into `k` folds: each class is shuffled, then dealt round-robin
/// with the fold pointer carried across classes so fold sizes stay even.
fn deal(high: &[String], low: &[String], k: usize, seed: u64, tags: &[u64]) -> Vec<Vec<String>> {
    let mut rng = rng_for(seed, tags);
    let mut h = high.to_vec();
    let mut l = low.to_vec();
    h.sort();
    l.sort();
    h.shuffle(&mut rng);
    l.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (pos, id) in h.into_iter().chain(l).enumerate() {
        folds[pos % k].push(id);
    }
    for f in &mut folds {
        f.sort();
    }
    folds
}

pub fn make_fold_plan(dataset: &Dataset, seed: u64) -> Result<FoldPlan> {
    let participants = dataset.participants();
    if participants.len() < OUTER_FOLDS {
        return Err(LearnError::TooFewParticipants(format!(
            "{} participants, need at least {OUTER_FOLDS}",
            participants.len()
        )));
    }
    let high: Vec<String> = participants.iter().filter(|p| p.1.is_high()).map(|p| p.0.clone()).collect();
    let low: Vec<String> = participants.iter().filter(|p| !p.1.is_high()).map(|p| p.0.clone()).collect();
    if high.is_empty() || low.is_empty() {
        return Err(LearnError::TooFewParticipants("one class has no participants".into()));
    }
    let outer = deal(&high, &low, OUTER_FOLDS, seed, &[tag("outer")]);
    let is_high: HashSet<&str> = high.iter().map(|s| s.as_str()).collect();
    let inner = outer
        .iter()
        .enumerate()
        .map(|(k, test)| {
            let test: HashSet<&String> = test.iter().collect();
            let (th, tl): (Vec<String>, Vec<String>) = participants
                .iter()
                .map(|p| p.0.clone())
                .filter(|p| !test.contains(p))
                .partition(|p| is_high.contains(p.as_str()));
            deal(&th, &tl, INNER_FOLDS, seed, &[tag("inner"), k as u64])
        })
        .collect();
    Ok(FoldPlan { outer, inner, seed })
}

impl FoldPlan {
    pub fn n_outer(&self) -> usize {
        self.outer.len()
    }

    fn fold_of(folds: &[Vec<String>]) -> HashMap<&str, usize> {
        let mut m = HashMap::new();
        for (f, ids) in folds.iter().enumerate() {
            for id in ids {
                m.insert(id.as_str(), f);
            }
        }
        m
    }

    /// Row indices of outer fold `k`: (training, test).
    pub fn outer_rows(&self, dataset: &Dataset, k: usize) -> (Vec<usize>, Vec<usize>) {
        let test: HashSet<&str> = self.outer[k].iter().map(|s| s.as_str()).collect();
        (0..dataset.n_samples()).partition(|&i| !test.contains(dataset.samples[i].participant_id.as_str()))
    }

    /// Row indices of inner fold `i` within outer fold `k`: (training, validation).
    pub fn inner_rows(&self, dataset: &Dataset, k: usize, i: usize) -> (Vec<usize>, Vec<usize>) {
        let of = Self::fold_of(&self.inner[k]);
        let mut train = Vec::new();
        let mut val = Vec::new();
        for (r, s) in dataset.samples.iter().enumerate() {
            match of.get(s.participant_id.as_str()) {
                Some(&f) if f == i => val.push(r),
                Some(_) => train.push(r),
                None => {}
            }
        }
        (train, val)
    }

    /// Checks that the plan partitions exactly the dataset's participants.
    pub fn check(&self, dataset: &Dataset) -> Result<()> {
        let ids: BTreeMap<String, ()> = dataset.participants().into_iter().map(|p| (p.0, ())).collect();
        let of = Self::fold_of(&self.outer);
        let listed: usize = self.outer.iter().map(|f| f.len()).sum();
        if listed != of.len() || of.len() != ids.len() || ids.keys().any(|id| !of.contains_key(id.as_str())) {
            return Err(LearnError::PlanMismatch("outer folds do not partition the participants".into()));
        }
        if self.inner.len() != self.outer.len() {
            return Err(LearnError::PlanMismatch("inner plan length differs from outer".into()));
        }
        for (k, inner) in self.inner.iter().enumerate() {
            let inner_ids: HashSet<&str> = inner.iter().flatten().map(|s| s.as_str()).collect();
            let n_inner: usize = inner.iter().map(|f| f.len()).sum();
            let expected: HashSet<&str> = ids.keys().map(|s| s.as_str()).filter(|id| of[id] != k).collect();
            if inner_ids != expected || n_inner != expected.len() {
                return Err(LearnError::PlanMismatch(format!("inner folds of outer fold {k} do not partition its training set")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
