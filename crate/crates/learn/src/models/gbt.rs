//! Histogram gradient-boosted trees for the logistic loss.
//!
//! One engine serves both presets: depth-wise growth with optional DART
//! dropout or a coordinate-descent linear booster, and leaf-wise growth
//! bounded by a leaf count.

use rand::seq::index::sample;
use rand::Rng;
use voxmark_core::seed::{rng_for, tag};

use crate::binning::Binner;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Booster {
    Tree,
    Linear,
    Dart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    DepthWise,
    LeafWise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtParams {
    pub booster: Booster,
    pub growth: Growth,
    pub n_rounds: usize,
    pub eta: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// L1 penalty on leaf weights.
    pub alpha: f64,
    /// Minimum loss reduction to make a split.
    pub gamma: f64,
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    /// Minimum hessian sum per child.
    pub min_child_weight: f64,
    pub min_child_samples: usize,
    /// Row fraction per bagging draw.
    pub subsample: f64,
    /// Rounds between bagging draws.
    pub bagging_freq: usize,
    pub colsample: f64,
    pub rate_drop: f64,
    pub skip_drop: f64,
    pub weighted_drop: bool,
    pub forest_normalize: bool,
    pub max_bins: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            booster: Booster::Tree,
            growth: Growth::DepthWise,
            n_rounds: 100,
            eta: 0.3,
            lambda: 1.0,
            alpha: 0.0,
            gamma: 0.0,
            max_depth: Some(6),
            max_leaves: None,
            min_child_weight: 1.0,
            min_child_samples: 1,
            subsample: 1.0,
            bagging_freq: 1,
            colsample: 1.0,
            rate_drop: 0.0,
            skip_drop: 0.0,
            weighted_drop: false,
            forest_normalize: false,
            max_bins: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn depth(&self) -> usize {
        fn d(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + d(nodes, left).max(d(nodes, right)),
            }
        }
        d(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gbt {
    pub base: f64,
    trees: Vec<(Tree, f64)>,
    linear: Option<(Vec<f64>, f64)>,
    /// Mean training log-loss after each round.
    pub loss_history: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn log_loss(margin: &[f64], y: &[f64]) -> f64 {
    let n = margin.len() as f64;
    margin
        .iter()
        .zip(y)
        .map(|(&f, &t)| {
            let sp = if f > 30.0 { f } else if f < -30.0 { f.exp() } else { f.exp().ln_1p() };
            sp - t * f
        })
        .sum::<f64>()
        / n
}

fn soft(g: f64, alpha: f64) -> f64 {
    g.signum() * (g.abs() - alpha).max(0.0)
}

struct Grower<'a> {
    p: &'a GbtParams,
    codes: &'a [u8],
    n_rows: usize,
    binner: &'a Binner,
    grad: &'a [f64],
    hess: &'a [f64],
    features: Vec<usize>,
}

struct Candidate {
    node: usize,
    depth: usize,
    rows: Vec<usize>,
    g: f64,
    h: f64,
    split: Option<(f64, usize, usize)>,
}

impl Grower<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        let t = soft(g, self.p.alpha);
        t * t / (h + self.p.lambda)
    }

    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -soft(g, self.p.alpha) / (h + self.p.lambda)
    }

    /// Best (gain, feature, bin) for a node.
    fn best_split(&self, rows: &[usize], g: f64, h: f64, depth: usize) -> Option<(f64, usize, usize)> {
        if self.p.max_depth.is_some_and(|d| depth >= d) || rows.len() < 2 * self.p.min_child_samples.max(1) {
            return None;
        }
        let parent = self.score(g, h);
        let mut best: Option<(f64, usize, usize)> = None;
        let mut hist = vec![(0.0f64, 0.0f64, 0usize); self.p.max_bins];
        for &f in &self.features {
            let nb = self.binner.n_bins(f);
            if nb < 2 {
                continue;
            }
            hist[..nb].iter_mut().for_each(|e| *e = (0.0, 0.0, 0));
            let col = &self.codes[f * self.n_rows..(f + 1) * self.n_rows];
            for &r in rows {
                let e = &mut hist[col[r] as usize];
                e.0 += self.grad[r];
                e.1 += self.hess[r];
                e.2 += 1;
            }
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0usize);
            for (b, e) in hist[..nb - 1].iter().enumerate() {
                gl += e.0;
                hl += e.1;
                cl += e.2;
                let (gr, hr, cr) = (g - gl, h - hl, rows.len() - cl);
                if cl < self.p.min_child_samples.max(1) || cr < self.p.min_child_samples.max(1) {
                    continue;
                }
                if hl < self.p.min_child_weight || hr < self.p.min_child_weight {
                    continue;
                }
                let gain = 0.5 * (self.score(gl, hl) + self.score(gr, hr) - parent) - self.p.gamma;
                if gain > 1e-12 && best.map_or(true, |(bg, _, _)| gain > bg) {
                    best = Some((gain, f, b));
                }
            }
        }
        best
    }

    fn candidate(&self, node: usize, depth: usize, rows: Vec<usize>) -> Candidate {
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        let split = self.best_split(&rows, g, h, depth);
        Candidate { node, depth, rows, g, h, split }
    }

    fn grow(&self, rows: Vec<usize>) -> Tree {
        let mut nodes = vec![Node::Leaf(0.0)];
        let mut open = vec![self.candidate(0, 0, rows)];
        let mut leaves = 1;
        loop {
            // Leaf-wise growth takes the best gain first; depth-wise growth
            // expands every splittable node, so the order does not matter.
            let pick = open
                .iter()
                .enumerate()
                .filter(|(_, c)| c.split.is_some())
                .max_by(|a, b| {
                    let (ga, gb) = (a.1.split.unwrap().0, b.1.split.unwrap().0);
                    ga.total_cmp(&gb).then(b.1.node.cmp(&a.1.node))
                })
                .map(|(i, _)| i);
            let Some(i) = pick else { break };
            if self.p.max_leaves.is_some_and(|m| leaves >= m) {
                break;
            }
            let c = open.swap_remove(i);
            let (_, f, b) = c.split.unwrap();
            let col = &self.codes[f * self.n_rows..(f + 1) * self.n_rows];
            let (lr, rr): (Vec<usize>, Vec<usize>) = c.rows.iter().partition(|&&r| col[r] as usize <= b);
            let (l, r) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf(0.0));
            nodes.push(Node::Leaf(0.0));
            nodes[c.node] = Node::Split { feature: f, threshold: self.binner.thresholds[f][b], left: l, right: r };
            leaves += 1;
            open.push(self.candidate(l, c.depth + 1, lr));
            open.push(self.candidate(r, c.depth + 1, rr));
        }
        for c in open {
            nodes[c.node] = Node::Leaf(self.p.eta * self.leaf_value(c.g, c.h));
        }
        Tree { nodes }
    }
}

impl Gbt {
    pub fn fit(x: &Matrix, y: &[bool], p: &GbtParams, seed: u64) -> Self {
        let n = x.rows;
        let yf: Vec<f64> = y.iter().map(|&b| b as u8 as f64).collect();
        let prior = (yf.iter().sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
        let base = (prior / (1.0 - prior)).ln();
        let mut margin = vec![base; n];
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        let mut loss_history = Vec::with_capacity(p.n_rounds);
        let gradients = |margin: &[f64], grad: &mut [f64], hess: &mut [f64]| {
            for i in 0..n {
                let q = sigmoid(margin[i]);
                grad[i] = q - yf[i];
                hess[i] = (q * (1.0 - q)).max(1e-16);
            }
        };

        if p.booster == Booster::Linear {
            let (w, b) = Self::fit_linear(x, &yf, p, &mut margin, &mut loss_history);
            return Gbt { base, trees: Vec::new(), linear: Some((w, b)), loss_history };
        }

        let binner = Binner::fit(x, p.max_bins);
        let codes = binner.transform(x);
        let mut trees: Vec<(Tree, f64)> = Vec::new();
        // Per-tree outputs on the training rows, before weights.
        let mut outputs: Vec<Vec<f64>> = Vec::new();
        let mut bag: Vec<usize> = (0..n).collect();
        for round in 0..p.n_rounds {
            let mut rng = rng_for(seed, &[tag("round"), round as u64]);
            let mut dropped = Vec::new();
            if p.booster == Booster::Dart && !trees.is_empty() && rng.gen::<f64>() >= p.skip_drop {
                let wsum: f64 = trees.iter().map(|t| t.1).sum();
                let k = trees.len() as f64;
                for (t, tr) in trees.iter().enumerate() {
                    let prob = if p.weighted_drop { (p.rate_drop * k * tr.1 / wsum).min(1.0) } else { p.rate_drop };
                    if rng.gen::<f64>() < prob {
                        dropped.push(t);
                    }
                }
            }
            let mut work = margin.clone();
            for &t in &dropped {
                for i in 0..n {
                    work[i] -= trees[t].1 * outputs[t][i];
                }
            }
            gradients(&work, &mut grad, &mut hess);
            if p.subsample < 1.0 && round % p.bagging_freq.max(1) == 0 {
                let m = ((p.subsample * n as f64).round() as usize).clamp(1, n);
                bag = sample(&mut rng, n, m).into_vec();
                bag.sort_unstable();
            }
            let nf = ((p.colsample * x.cols as f64).round() as usize).clamp(1, x.cols);
            let mut features = sample(&mut rng, x.cols, nf).into_vec();
            features.sort_unstable();
            let grower = Grower { p, codes: &codes, n_rows: n, binner: &binner, grad: &grad, hess: &hess, features };
            let tree = grower.grow(bag.clone());
            let out: Vec<f64> = (0..n).map(|i| tree.predict(x.row(i))).collect();
            let k = dropped.len() as f64;
            let new_w = if dropped.is_empty() {
                1.0
            } else if p.forest_normalize {
                let f = 1.0 / (1.0 + p.eta);
                for &t in &dropped {
                    trees[t].1 *= f;
                }
                f
            } else {
                for &t in &dropped {
                    trees[t].1 *= k / (k + p.eta);
                }
                1.0 / (k + p.eta)
            };
            trees.push((tree, new_w));
            outputs.push(out);
            margin = vec![base; n];
            for (t, (_, w)) in trees.iter().enumerate() {
                for i in 0..n {
                    margin[i] += w * outputs[t][i];
                }
            }
            loss_history.push(log_loss(&margin, &yf));
        }
        Gbt { base, trees, linear: None, loss_history }
    }

    /// Coordinate-descent linear booster; penalties scale with the row count.
    fn fit_linear(x: &Matrix, yf: &[f64], p: &GbtParams, margin: &mut [f64], hist: &mut Vec<f64>) -> (Vec<f64>, f64) {
        let n = x.rows;
        let (lambda, alpha) = (p.lambda * n as f64, p.alpha * n as f64);
        let mut w = vec![0.0; x.cols];
        let mut bias = 0.0;
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        let refresh = |margin: &[f64], grad: &mut [f64], hess: &mut [f64]| {
            for i in 0..n {
                let q = sigmoid(margin[i]);
                grad[i] = q - yf[i];
                hess[i] = (q * (1.0 - q)).max(1e-16);
            }
        };
        for _ in 0..p.n_rounds {
            refresh(margin, &mut grad, &mut hess);
            let (g, h): (f64, f64) = (grad.iter().sum(), hess.iter().sum());
            let db = -p.eta * g / h;
            bias += db;
            for (i, m) in margin.iter_mut().enumerate() {
                *m += db;
                let q = sigmoid(*m);
                grad[i] = q - yf[i];
                hess[i] = (q * (1.0 - q)).max(1e-16);
            }
            for j in 0..x.cols {
                let (mut g, mut h) = (0.0, 0.0);
                for i in 0..n {
                    let v = x.get(i, j);
                    g += grad[i] * v;
                    h += hess[i] * v * v;
                }
                if h < 1e-5 {
                    continue;
                }
                let gl = g + lambda * w[j];
                let hl = h + lambda;
                let delta = if w[j] - gl / hl >= 0.0 {
                    (-(gl + alpha) / hl).max(-w[j])
                } else {
                    (-(gl - alpha) / hl).min(-w[j])
                } * p.eta;
                if delta == 0.0 {
                    continue;
                }
                w[j] += delta;
                for i in 0..n {
                    margin[i] += delta * x.get(i, j);
                    let q = sigmoid(margin[i]);
                    grad[i] = q - yf[i];
                    hess[i] = (q * (1.0 - q)).max(1e-16);
                }
            }
            hist.push(log_loss(margin, yf));
        }
        (w, bias)
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        let mut m = self.base;
        if let Some((w, b)) = &self.linear {
            m += b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        }
        for (t, wt) in &self.trees {
            m += wt * t.predict(row);
        }
        m
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> impl Iterator<Item = &Tree> {
        self.trees.iter().map(|t| &t.0)
    }
}
