//! Boruta all-relevant feature selection.
//!
//! Each iteration fits a random forest on the features still in play plus a
//! value-permuted shadow copy of every input feature, and counts a hit for
//! each real feature whose importance beats the configured percentile of
//! shadow importances. Hit counts are tested against Binomial(t, 1/2).
//!
//! The shadow pool keeps its full size as features are rejected. Shrinking
//! it lowers the bar the survivors must clear and confirms noise.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use voxmark_core::seed::{derive_seed, rng_for, tag};

use crate::binning::Binner;
use crate::forest::{gini_importance, BinnedData, ForestConfig};
use crate::matrix::{median, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BorutaConfig {
    /// Percentile of shadow importances a feature must beat (100 = max).
    pub perc: f64,
    pub n_trees: usize,
    pub max_iter: usize,
    pub alpha: f64,
    pub max_depth: usize,
    pub max_bins: usize,
}

impl Default for BorutaConfig {
    fn default() -> Self {
        BorutaConfig { perc: 100.0, n_trees: 100, max_iter: 30, alpha: 0.05, max_depth: 5, max_bins: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Confirmed,
    Tentative,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaResult {
    /// Final decision per input column, tentative ones already resolved.
    pub decisions: Vec<Decision>,
    pub hits: Vec<usize>,
    pub iterations: usize,
    /// Columns still tentative when the iteration budget ran out.
    pub resolved_tentative: Vec<usize>,
}

impl BorutaResult {
    pub fn confirmed(&self) -> Vec<usize> {
        (0..self.decisions.len()).filter(|&j| self.decisions[j] == Decision::Confirmed).collect()
    }

    pub fn rejected(&self) -> Vec<usize> {
        (0..self.decisions.len()).filter(|&j| self.decisions[j] == Decision::Rejected).collect()
    }
}

/// Linear-interpolated percentile, `q` in [0, 100].
fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return 0.0;
    }
    let pos = (q / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Runs Boruta on a complete (imputed) matrix.
pub fn boruta_select(x: &Matrix, y: &[bool], cfg: &BorutaConfig, seed: u64) -> BorutaResult {
    assert_eq!(x.rows, y.len());
    let p = x.cols;
    let n = x.rows;
    let binner = Binner::fit(x, cfg.max_bins);
    let codes = binner.transform(x);
    let bins: Vec<usize> = (0..p).map(|j| binner.n_bins(j)).collect();

    let mut decisions = vec![Decision::Tentative; p];
    let mut hits = vec![0usize; p];
    let mut imp_hist: Vec<Vec<f64>> = vec![Vec::new(); p];
    let mut shadow_hist = Vec::new();
    let mut iterations = 0;
    let tail = cfg.alpha / 2.0;

    for it in 1..=cfg.max_iter {
        if !decisions.contains(&Decision::Tentative) {
            break;
        }
        iterations = it;
        let cur: Vec<usize> = (0..p).filter(|&j| decisions[j] != Decision::Rejected).collect();
        let m = cur.len();
        let mut rng = rng_for(seed, &[tag("shadow"), it as u64]);
        let mut buf = Vec::with_capacity((m + p) * n);
        for &j in &cur {
            buf.extend_from_slice(&codes[j * n..(j + 1) * n]);
        }
        for j in 0..p {
            let mut col = codes[j * n..(j + 1) * n].to_vec();
            col.shuffle(&mut rng);
            buf.extend(col);
        }
        let nb: Vec<usize> = cur.iter().map(|&j| bins[j]).chain(bins.iter().copied()).collect();
        let data = BinnedData { rows: n, codes: &buf, n_bins: &nb, labels: y };
        let fcfg = ForestConfig { n_trees: cfg.n_trees, max_depth: cfg.max_depth, mtry: None };
        let imp = gini_importance(&data, fcfg, derive_seed(seed, &[tag("forest"), it as u64]));
        let thr = percentile(&imp[m..], cfg.perc);
        shadow_hist.push(thr);
        for (c, &j) in cur.iter().enumerate() {
            imp_hist[j].push(imp[c]);
            if imp[c] > thr {
                hits[j] += 1;
            }
        }
        let binom = Binomial::new(0.5, it as u64).expect("valid binomial");
        for j in 0..p {
            if decisions[j] != Decision::Tentative {
                continue;
            }
            let h = hits[j] as u64;
            let upper = if h == 0 { 1.0 } else { binom.sf(h - 1) };
            let lower = binom.cdf(h);
            if upper < tail {
                decisions[j] = Decision::Confirmed;
            } else if lower < tail {
                decisions[j] = Decision::Rejected;
            }
        }
    }

    let mut resolved_tentative = Vec::new();
    let shadow_median = median(&mut shadow_hist).unwrap_or(0.0);
    for j in 0..p {
        if decisions[j] == Decision::Tentative {
            resolved_tentative.push(j);
            let mi = median(&mut imp_hist[j]).unwrap_or(0.0);
            decisions[j] = if mi > shadow_median { Decision::Confirmed } else { Decision::Rejected };
        }
    }
    BorutaResult { decisions, hits, iterations, resolved_tentative }
}
