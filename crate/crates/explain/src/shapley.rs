//! Model-agnostic Shapley values by permutation sampling.
//!
//! The value of a coalition S for sample x is the model output with the
//! features in S taken from x and the rest from a background row. Each
//! sampled ordering is paired with its reverse (antithetic sampling) and
//! both use the same background row; background rows are visited cyclically,
//! so when the number of pairs is a multiple of the background size the
//! attributions add up to f(x) − E[f(background)] exactly.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use voxmark_core::seed::{rng_for, tag};
use voxmark_learn::TrainedModel;

use crate::{ExplainError, Result};

pub trait Model: Sync {
    fn output(&self, row: &[f64]) -> f64;
    /// Columns the model reads; all others receive exactly zero.
    fn active(&self) -> Vec<usize>;
}

impl Model for TrainedModel {
    fn output(&self, row: &[f64]) -> f64 {
        TrainedModel::output(self, row)
    }

    fn active(&self) -> Vec<usize> {
        self.selected.clone()
    }
}

/// A closure with an explicit set of active columns.
pub struct FnModel<F> {
    pub f: F,
    pub active: Vec<usize>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Model for FnModel<F> {
    fn output(&self, row: &[f64]) -> f64 {
        (self.f)(row)
    }

    fn active(&self) -> Vec<usize> {
        self.active.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    /// Mean model output over the background rows.
    pub base_value: f64,
    /// Samples × input columns.
    pub values: Vec<Vec<f64>>,
    /// Monte Carlo standard error of each value.
    pub std_errors: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
    /// Monte Carlo standard error of each row's attribution sum.
    pub sum_std_errors: Vec<f64>,
}

impl Attribution {
    /// |Σφ + base − f(x)| for sample `i`.
    pub fn local_gap(&self, i: usize) -> f64 {
        (self.values[i].iter().sum::<f64>() + self.base_value - self.outputs[i]).abs()
    }

    /// Mean |φ| per column over all samples.
    pub fn mean_abs(&self) -> Vec<f64> {
        let width = self.values.first().map_or(0, |r| r.len());
        let n = self.values.len().max(1) as f64;
        (0..width).map(|j| self.values.iter().map(|r| r[j].abs()).sum::<f64>() / n).collect()
    }
}

pub const MIN_PERMUTATIONS: usize = 50;

struct Row {
    values: Vec<f64>,
    se: Vec<f64>,
    output: f64,
    sum_se: f64,
}

fn explain_row<M: Model>(model: &M, x: &[f64], i: usize, active: &[usize], background: &[Vec<f64>], pairs: usize, seed: u64) -> Row {
    let width = x.len();
    let k = active.len();
    let mut rng = rng_for(seed, &[tag("shapley"), i as u64]);
    let mut sum = vec![0.0; k];
    let mut sum_sq = vec![0.0; k];
    let mut totals = Vec::with_capacity(pairs);
    let fx = model.output(x);
    let mut order: Vec<usize> = (0..k).collect();
    let mut contrib = vec![0.0; k];
    for m in 0..pairs {
        let z = &background[(m + i) % background.len()];
        order.shuffle(&mut rng);
        contrib.iter_mut().for_each(|c| *c = 0.0);
        let fz = model.output(z);
        for pass in 0..2 {
            let mut cur = z.clone();
            let mut prev = fz;
            for step in 0..k {
                let a = if pass == 0 { order[step] } else { order[k - 1 - step] };
                let j = active[a];
                cur[j] = x[j];
                let v = model.output(&cur);
                contrib[a] += 0.5 * (v - prev);
                prev = v;
            }
        }
        for a in 0..k {
            sum[a] += contrib[a];
            sum_sq[a] += contrib[a] * contrib[a];
        }
        totals.push(fx - fz);
    }
    let p = pairs as f64;
    let se_of = |s: f64, s2: f64| if pairs > 1 { ((s2 - s * s / p).max(0.0) / (p - 1.0) / p).sqrt() } else { f64::INFINITY };
    let mut values = vec![0.0; width];
    let mut se = vec![0.0; width];
    for a in 0..k {
        values[active[a]] = sum[a] / p;
        se[active[a]] = se_of(sum[a], sum_sq[a]);
    }
    let (ts, ts2) = totals.iter().fold((0.0, 0.0), |(s, s2), t| (s + t, s2 + t * t));
    Row { values, se, output: fx, sum_se: se_of(ts, ts2) }
}

/// Attributions for every row of `data`. Rows must be complete (imputed).
pub fn shapley_values<M: Model>(
    model: &M,
    data: &[Vec<f64>],
    background: &[Vec<f64>],
    n_permutations: usize,
    seed: u64,
) -> Result<Attribution> {
    if background.is_empty() {
        return Err(ExplainError::Invalid("empty background set".into()));
    }
    if n_permutations < MIN_PERMUTATIONS {
        return Err(ExplainError::Invalid(format!("need at least {MIN_PERMUTATIONS} permutations, got {n_permutations}")));
    }
    let width = background[0].len();
    if background.iter().chain(data).any(|r| r.len() != width) {
        return Err(ExplainError::Invalid("rows differ in width".into()));
    }
    let active = model.active();
    if active.iter().any(|&j| j >= width) {
        return Err(ExplainError::Invalid("active column outside the input".into()));
    }
    let pairs = n_permutations.div_ceil(2);
    let base_value = background.iter().map(|z| model.output(z)).sum::<f64>() / background.len() as f64;
    let rows: Vec<Row> =
        data.par_iter().enumerate().map(|(i, x)| explain_row(model, x, i, &active, background, pairs, seed)).collect();
    let mut out = Attribution { base_value, values: Vec::new(), std_errors: Vec::new(), outputs: Vec::new(), sum_std_errors: Vec::new() };
    for r in rows {
        out.values.push(r.values);
        out.std_errors.push(r.se);
        out.outputs.push(r.output);
        out.sum_std_errors.push(r.sum_se);
    }
    Ok(out)
}

/// Exact Shapley values of one row by enumerating all coalitions of the
/// active columns, with the same background-averaged value function.
pub fn exact_shapley<M: Model>(model: &M, x: &[f64], background: &[Vec<f64>]) -> Vec<f64> {
    let active = model.active();
    let k = active.len();
    assert!(k <= 16, "brute force limited to 16 features");
    let value = |mask: usize| -> f64 {
        background
            .iter()
            .map(|z| {
                let mut r = z.clone();
                for (a, &j) in active.iter().enumerate() {
                    if mask & (1 << a) != 0 {
                        r[j] = x[j];
                    }
                }
                model.output(&r)
            })
            .sum::<f64>()
            / background.len() as f64
    };
    let v: Vec<f64> = (0..1usize << k).map(value).collect();
    let fact: Vec<f64> = (0..=k).scan(1.0, |acc, i| {
        if i > 0 {
            *acc *= i as f64;
        }
        Some(*acc)
    })
    .collect();
    let mut phi = vec![0.0; x.len()];
    for (a, &j) in active.iter().enumerate() {
        let bit = 1 << a;
        let mut s = 0.0;
        for mask in 0..1usize << k {
            if mask & bit != 0 {
                continue;
            }
            let size = mask.count_ones() as usize;
            s += fact[size] * fact[k - size - 1] / fact[k] * (v[mask | bit] - v[mask]);
        }
        phi[j] = s;
    }
    phi
}
