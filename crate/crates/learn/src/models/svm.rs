//! C-support vector classifier solved with SMO and second-order working-set
//! selection.

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Svm {
    pub kernel: Kernel,
    support: Matrix,
    /// α_i·y_i for each support vector.
    coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

const TAU: f64 = 1e-12;

impl Svm {
    pub fn fit(x: &Matrix, y: &[bool], params: SvmParams) -> Self {
        let n = x.rows;
        let c = params.c;
        let ys: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = params.kernel.eval(x.row(i), x.row(j));
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let q = |i: usize, j: usize| ys[i] * ys[j] * k[i * n + j];
        let qd: Vec<f64> = (0..n).map(|i| k[i * n + i]).collect();
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let mut iterations = 0;

        while iterations < params.max_iter {
            // Maximal violating index i, then j by second-order gain.
            let mut gmax = f64::NEG_INFINITY;
            let mut ii = None;
            for t in 0..n {
                if ys[t] > 0.0 {
                    if alpha[t] < c && -grad[t] >= gmax {
                        gmax = -grad[t];
                        ii = Some(t);
                    }
                } else if alpha[t] > 0.0 && grad[t] >= gmax {
                    gmax = grad[t];
                    ii = Some(t);
                }
            }
            let Some(i) = ii else { break };
            let mut gmax2 = f64::NEG_INFINITY;
            let mut jj = None;
            let mut best = f64::INFINITY;
            for t in 0..n {
                let (eligible, gdiff, g2) = if ys[t] > 0.0 {
                    (alpha[t] > 0.0, gmax + grad[t], grad[t])
                } else {
                    (alpha[t] < c, gmax - grad[t], -grad[t])
                };
                if !eligible {
                    continue;
                }
                gmax2 = gmax2.max(g2);
                if gdiff > 0.0 {
                    let quad = qd[i] + qd[t] - 2.0 * ys[i] * ys[t] * q(i, t);
                    let obj = -(gdiff * gdiff) / quad.max(TAU);
                    if obj <= best {
                        best = obj;
                        jj = Some(t);
                    }
                }
            }
            let Some(j) = jj else { break };
            if gmax + gmax2 < params.tol {
                break;
            }
            iterations += 1;

            let (ai, aj) = (alpha[i], alpha[j]);
            if ys[i] != ys[j] {
                let quad = (qd[i] + qd[j] + 2.0 * q(i, j)).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (qd[i] + qd[j] - 2.0 * q(i, j)).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
            for t in 0..n {
                grad[t] += q(i, t) * di + q(j, t) * dj;
            }
        }

        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut n_free, mut sum_free) = (0usize, 0.0);
        for t in 0..n {
            let yg = ys[t] * grad[t];
            let at_upper = alpha[t] >= c;
            let at_lower = alpha[t] <= 0.0;
            if at_upper {
                if ys[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if at_lower {
                if ys[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        let rho = if n_free > 0 {
            sum_free / n_free as f64
        } else if ub.is_finite() && lb.is_finite() {
            0.5 * (ub + lb)
        } else {
            0.0
        };
        let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
        Svm {
            kernel: params.kernel,
            support: x.select_rows(&sv),
            coef: sv.iter().map(|&t| alpha[t] * ys[t]).collect(),
            rho,
            iterations,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        (0..self.support.rows).map(|s| self.coef[s] * self.kernel.eval(self.support.row(s), row)).sum::<f64>() - self.rho
    }

    pub fn n_support(&self) -> usize {
        self.support.rows
    }
}
