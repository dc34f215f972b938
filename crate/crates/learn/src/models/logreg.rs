//! Penalized logistic regression fitted by accelerated proximal gradient.
//!
//! Objective, with the `C` convention of common toolkits:
//! `C·Σ logloss + r·‖w‖₁ + (1 − r)/2·‖w‖²`, intercept unpenalized.

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    L1,
    L2,
    ElasticNet(f64),
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegParams {
    pub penalty: Penalty,
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogReg {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else if z < -30.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

/// Largest eigenvalue of [X 1]ᵀ[X 1] by power iteration.
fn spectral_bound(x: &Matrix) -> f64 {
    let p = x.cols + 1;
    let mut v = vec![1.0 / (p as f64).sqrt(); p];
    let mut lambda = 0.0;
    for _ in 0..50 {
        let mut u = vec![0.0; p];
        for i in 0..x.rows {
            let r = x.row(i);
            let xv: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() + v[p - 1];
            for (uj, a) in u.iter_mut().zip(r) {
                *uj += xv * a;
            }
            u[p - 1] += xv;
        }
        let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        lambda = norm;
        v = u.into_iter().map(|a| a / norm).collect();
    }
    lambda * 1.01
}

impl LogReg {
    pub fn fit(x: &Matrix, y: &[bool], params: LogRegParams) -> Self {
        let n = x.rows as f64;
        let p = x.cols;
        let (l1, l2) = match params.penalty {
            Penalty::L1 => (1.0, 0.0),
            Penalty::L2 => (0.0, 1.0),
            Penalty::ElasticNet(r) => (r, 1.0 - r),
            Penalty::None => (0.0, 0.0),
        };
        // Divide the objective by C·n.
        let scale = 1.0 / (params.c * n);
        let (l1, l2) = (l1 * scale, l2 * scale);
        let lip = 0.25 * spectral_bound(x) / n + l2;
        let step = 1.0 / lip;
        let ys: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();

        let objective = |theta: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..x.rows {
                let z = x.row(i).iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() + theta[p];
                s += softplus(-ys[i] * z);
            }
            s / n + theta[..p].iter().map(|w| l1 * w.abs() + 0.5 * l2 * w * w).sum::<f64>()
        };
        let gradient = |theta: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..x.rows {
                let r = x.row(i);
                let z = r.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() + theta[p];
                let c = -ys[i] * sigmoid(-ys[i] * z) / n;
                for (gj, a) in g.iter_mut().zip(r) {
                    *gj += c * a;
                }
                g[p] += c;
            }
            for j in 0..p {
                g[j] += l2 * theta[j];
            }
        };

        let mut theta = vec![0.0; p + 1];
        let mut momentum = theta.clone();
        let mut t: f64 = 1.0;
        let mut g = vec![0.0; p + 1];
        let mut prev_obj = objective(&theta);
        let mut iterations = 0;
        for it in 0..params.max_iter {
            iterations = it + 1;
            gradient(&momentum, &mut g);
            let mut next: Vec<f64> = momentum.iter().zip(&g).map(|(m, gi)| m - step * gi).collect();
            for w in &mut next[..p] {
                let thr = step * l1;
                *w = w.signum() * (w.abs() - thr).max(0.0);
            }
            let obj = objective(&next);
            let delta = next.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if obj > prev_obj {
                // Adaptive restart: drop momentum and retry from the last iterate.
                momentum = theta.clone();
                t = 1.0;
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            momentum = next.iter().zip(&theta).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
            theta = next;
            t = t_next;
            let rel = (prev_obj - obj).abs() / prev_obj.abs().max(1e-12);
            prev_obj = obj;
            if delta < params.tol && rel < params.tol {
                break;
            }
        }
        LogReg { intercept: theta[p], weights: theta[..p].to_vec(), iterations }
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(row.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.intercept)
    }
}
