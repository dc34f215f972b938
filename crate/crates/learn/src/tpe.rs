//! Tree-structured Parzen estimator over a [`HyperSpace`].
//!
//! Parameters are modelled independently. Each numeric parameter gets a
//! mixture of truncated Gaussians (one per observation plus a broad prior)
//! in its search scale; categoricals get smoothed frequency tables.

use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use voxmark_core::seed::{derive_seed, rng_for, tag};

use crate::space::{Config, Domain, HyperSpace, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpeConfig {
    pub n_startup: usize,
    pub gamma: f64,
    pub n_candidates: usize,
}

impl Default for TpeConfig {
    fn default() -> Self {
        TpeConfig { n_startup: 10, gamma: 0.25, n_candidates: 24 }
    }
}

const PRIMES: [u64; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton point `index` with a seeded Cranley-Patterson rotation.
pub fn halton_point(index: usize, dims: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, &[tag("halton")]);
    (0..dims)
        .map(|d| {
            let shift: f64 = rng.gen();
            let base = PRIMES[d % PRIMES.len()] + if d >= PRIMES.len() { 97 } else { 0 };
            (radical_inverse(index as u64 + 1, base) + shift).fract()
        })
        .collect()
}

/// Search-scale bounds of a numeric domain.
fn bounds(domain: &Domain) -> Option<(f64, f64)> {
    match domain {
        Domain::Float { lo, hi, log: true } => Some((lo.ln(), hi.ln())),
        Domain::Float { lo, hi, log: false } => Some((*lo, *hi)),
        Domain::Int { lo, hi } => Some((*lo as f64 - 0.5, *hi as f64 + 0.5)),
        Domain::Cat(_) => None,
    }
}

fn to_search(domain: &Domain, v: &Value) -> f64 {
    match (domain, v) {
        (Domain::Float { log: true, .. }, Value::Float(x)) => x.ln(),
        (Domain::Float { .. }, Value::Float(x)) => *x,
        (Domain::Int { .. }, Value::Int(x)) => *x as f64,
        (Domain::Cat(c), Value::Cat(s)) => c.iter().position(|x| x == s).unwrap_or(0) as f64,
        (_, Value::Int(x)) => *x as f64,
        (_, Value::Float(x)) => *x,
        _ => 0.0,
    }
}

fn from_search(domain: &Domain, z: f64) -> Value {
    match domain {
        Domain::Float { lo, hi, log } => Value::Float((if *log { z.exp() } else { z }).clamp(*lo, *hi)),
        Domain::Int { lo, hi } => Value::Int((z.round() as i64).clamp(*lo, *hi)),
        Domain::Cat(c) => Value::Cat(c[(z as usize).min(c.len() - 1)].clone()),
    }
}

/// Truncated Gaussian mixture on `[lo, hi]`.
struct Parzen {
    lo: f64,
    hi: f64,
    mus: Vec<f64>,
    sigmas: Vec<f64>,
    log_mass: Vec<f64>,
}

impl Parzen {
    fn new(obs: &[f64], lo: f64, hi: f64) -> Self {
        let range = hi - lo;
        let prior_mu = 0.5 * (lo + hi);
        let mut comps: Vec<(f64, bool)> = obs.iter().map(|&o| (o, false)).collect();
        comps.push((prior_mu, true));
        comps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mus: Vec<f64> = comps.iter().map(|c| c.0).collect();
        let n = mus.len();
        let min_sigma = range / (100.0f64).min(1.0 + obs.len() as f64);
        let sigmas: Vec<f64> = (0..n)
            .map(|i| {
                if comps[i].1 {
                    return range;
                }
                let left = if i > 0 { mus[i] - mus[i - 1] } else { mus[i] - lo };
                let right = if i + 1 < n { mus[i + 1] - mus[i] } else { hi - mus[i] };
                left.max(right).clamp(min_sigma, range)
            })
            .collect();
        let log_mass = mus
            .iter()
            .zip(&sigmas)
            .map(|(&m, &s)| {
                let nd = Normal::new(m, s).expect("positive sigma");
                (nd.cdf(hi) - nd.cdf(lo)).max(1e-300).ln()
            })
            .collect();
        Parzen { lo, hi, mus, sigmas, log_mass }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .mus
            .iter()
            .zip(&self.sigmas)
            .zip(&self.log_mass)
            .map(|((&m, &s), &lm)| Normal::new(m, s).expect("positive sigma").ln_pdf(x) - lm)
            .collect();
        log_sum_exp(&terms) - (self.mus.len() as f64).ln()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let j = rng.gen_range(0..self.mus.len());
        let nd = Normal::new(self.mus[j], self.sigmas[j]).expect("positive sigma");
        let (a, b) = (nd.cdf(self.lo), nd.cdf(self.hi));
        let u = a + rng.gen::<f64>() * (b - a);
        nd.inverse_cdf(u.clamp(1e-300, 1.0 - 1e-16)).clamp(self.lo, self.hi)
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Category probabilities from counts plus one.
fn cat_probs(obs: &[f64], k: usize) -> Vec<f64> {
    let mut w = vec![1.0; k];
    for &o in obs {
        w[(o as usize).min(k - 1)] += 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Next configuration to evaluate given the `(config, loss)` history.
/// Deterministic in `(seed, history)`.
pub fn tpe_suggest(history: &[(Config, f64)], space: &HyperSpace, seed: u64, cfg: &TpeConfig) -> Config {
    let n = history.len();
    if n < cfg.n_startup {
        return space.from_unit(&halton_point(n, space.len(), seed));
    }
    let mut rng = rng_for(seed, &[tag("tpe"), n as u64]);
    let first = history[0].1;
    if history.iter().all(|h| h.1 == first || (h.1.is_nan() && first.is_nan())) {
        return space.sample_uniform(&mut rng);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| history[a].1.total_cmp(&history[b].1).then(a.cmp(&b)));
    let n_good = ((cfg.gamma * n as f64).ceil() as usize).clamp(1, n - 1);
    let (good, bad) = order.split_at(n_good);

    let mut candidates: Vec<Vec<f64>> = vec![Vec::with_capacity(space.len()); cfg.n_candidates];
    let mut scores = vec![0.0; cfg.n_candidates];
    for p in &space.params {
        let obs = |idx: &[usize]| -> Vec<f64> {
            idx.iter().filter_map(|&i| history[i].0.get(&p.name).map(|v| to_search(&p.domain, v))).collect()
        };
        let (og, ob) = (obs(good), obs(bad));
        match bounds(&p.domain) {
            Some((lo, hi)) => {
                let l = Parzen::new(&og, lo, hi);
                let g = Parzen::new(&ob, lo, hi);
                for (c, s) in candidates.iter_mut().zip(scores.iter_mut()) {
                    let z = l.sample(&mut rng);
                    // Integers are scored where they will be evaluated.
                    let zq = if matches!(p.domain, Domain::Int { .. }) { z.round() } else { z };
                    *s += l.log_pdf(zq) - g.log_pdf(zq);
                    c.push(z);
                }
            }
            None => {
                let k = match &p.domain {
                    Domain::Cat(c) => c.len(),
                    _ => unreachable!(),
                };
                let pl = cat_probs(&og, k);
                let pg = cat_probs(&ob, k);
                for (c, s) in candidates.iter_mut().zip(scores.iter_mut()) {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut pick = k - 1;
                    for (i, q) in pl.iter().enumerate() {
                        acc += q;
                        if u < acc {
                            pick = i;
                            break;
                        }
                    }
                    *s += pl[pick].ln() - pg[pick].ln();
                    c.push(pick as f64);
                }
            }
        }
    }
    let best = (0..cfg.n_candidates).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
    space.params.iter().zip(&candidates[best]).map(|(p, &z)| (p.name.clone(), from_search(&p.domain, z))).collect()
}

/// Runs `n_trials` TPE steps against `objective` and returns the history.
pub fn minimize<F>(space: &HyperSpace, n_trials: usize, seed: u64, cfg: &TpeConfig, mut objective: F) -> Vec<(Config, f64)>
where
    F: FnMut(&Config) -> f64,
{
    let mut history = Vec::with_capacity(n_trials);
    for _ in 0..n_trials {
        let c = tpe_suggest(&history, space, seed, cfg);
        let loss = objective(&c);
        history.push((c, loss));
    }
    history
}

/// Independent uniform draws, the baseline TPE is compared with.
pub fn random_search<F>(space: &HyperSpace, n_trials: usize, seed: u64, mut objective: F) -> Vec<(Config, f64)>
where
    F: FnMut(&Config) -> f64,
{
    let mut rng = rng_for(derive_seed(seed, &[tag("random-search")]), &[]);
    (0..n_trials)
        .map(|_| {
            let c = space.sample_uniform(&mut rng);
            let l = objective(&c);
            (c, l)
        })
        .collect()
}

/// Lowest-loss entry; the earliest wins ties.
pub fn best(history: &[(Config, f64)]) -> Option<&(Config, f64)> {
    history.iter().fold(None, |b: Option<&(Config, f64)>, h| match b {
        Some(x) if x.1 <= h.1 || h.1.is_nan() => Some(x),
        _ => Some(h),
    })
}
