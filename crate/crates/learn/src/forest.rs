//! Random forest on binned features, used for Gini importances.

use rand::seq::index::sample;
use rand::Rng;
use voxmark_core::seed::{rng_for, Rng as SeedRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features tried per split; `None` means ⌊√p⌋.
    pub mtry: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 100, max_depth: 5, mtry: None }
    }
}

/// Column-major bin codes with the number of bins per column.
pub struct BinnedData<'a> {
    pub rows: usize,
    pub codes: &'a [u8],
    pub n_bins: &'a [usize],
    pub labels: &'a [bool],
}

impl BinnedData<'_> {
    fn cols(&self) -> usize {
        self.n_bins.len()
    }

    #[inline]
    fn code(&self, j: usize, i: usize) -> usize {
        self.codes[j * self.rows + i] as usize
    }
}

fn gini(pos: f64, n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a, 'b> {
    data: &'b BinnedData<'a>,
    cfg: ForestConfig,
    mtry: usize,
    importance: Vec<f64>,
    hist: Vec<[f64; 2]>,
}

impl TreeBuilder<'_, '_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize, rng: &mut SeedRng) {
        let n = rows.len() as f64;
        let pos = rows.iter().filter(|&&r| self.data.labels[r]).count() as f64;
        if depth >= self.cfg.max_depth || rows.len() < 2 || pos == 0.0 || pos == n {
            return;
        }
        let parent = n * gini(pos, n);
        let mut best: Option<(f64, usize, usize)> = None;
        for j in sample(rng, self.data.cols(), self.mtry).into_iter() {
            let nb = self.data.n_bins[j];
            if nb < 2 {
                continue;
            }
            let hist = &mut self.hist[..nb];
            hist.iter_mut().for_each(|h| *h = [0.0; 2]);
            for &r in rows.iter() {
                hist[self.data.code(j, r)][self.data.labels[r] as usize] += 1.0;
            }
            let (mut ln, mut lp) = (0.0, 0.0);
            for (b, h) in hist.iter().enumerate().take(nb - 1) {
                ln += h[0] + h[1];
                lp += h[1];
                if ln == 0.0 || ln == n {
                    continue;
                }
                let dec = parent - ln * gini(lp, ln) - (n - ln) * gini(pos - lp, n - ln);
                if best.map_or(true, |(d, _, _)| dec > d + 1e-12) {
                    best = Some((dec, j, b));
                }
            }
        }
        let Some((dec, j, b)) = best else { return };
        if dec <= 1e-12 {
            return;
        }
        self.importance[j] += dec;
        let mut split = 0;
        for i in 0..rows.len() {
            if self.data.code(j, rows[i]) <= b {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (left, right) = rows.split_at_mut(split);
        self.grow(left, depth + 1, rng);
        self.grow(right, depth + 1, rng);
    }
}

/// Mean decrease in Gini impurity per column, averaged over bootstrap trees
/// whose importances are each normalized to sum to one.
pub fn gini_importance(data: &BinnedData<'_>, cfg: ForestConfig, seed: u64) -> Vec<f64> {
    let p = data.cols();
    let mut total = vec![0.0; p];
    if data.rows == 0 || p == 0 {
        return total;
    }
    let mtry = cfg.mtry.unwrap_or(((p as f64).sqrt().floor() as usize).max(1)).clamp(1, p);
    let max_bins = data.n_bins.iter().copied().max().unwrap_or(1);
    let mut b = TreeBuilder { data, cfg, mtry, importance: vec![0.0; p], hist: vec![[0.0; 2]; max_bins] };
    for t in 0..cfg.n_trees {
        let mut rng = rng_for(seed, &[t as u64]);
        let mut rows: Vec<usize> = (0..data.rows).map(|_| rng.gen_range(0..data.rows)).collect();
        b.importance.iter_mut().for_each(|v| *v = 0.0);
        b.grow(&mut rows, 0, &mut rng);
        let s: f64 = b.importance.iter().sum();
        if s > 0.0 {
            for (acc, v) in total.iter_mut().zip(&b.importance) {
                *acc += v / s;
            }
        }
    }
    for v in &mut total {
        *v /= cfg.n_trees as f64;
    }
    total
}
