use serde::{Deserialize, Serialize};

use super::FrameSeries;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgConfig {
    /// Odd number of frames in the fitting window.
    pub window: usize,
    pub polyorder: usize,
}

impl Default for SgConfig {
    fn default() -> Self {
        Self { window: 9, polyorder: 2 }
    }
}

/// Convolution weights estimating the `deriv`-th derivative at the window
/// centre from a least-squares polynomial fit with unit sample spacing.
/// Weight `k` multiplies the sample at offset `k - window / 2`.
pub fn savgol_coefficients(window: usize, polyorder: usize, deriv: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 || window == 0 {
        return Err(Error::Config(format!("sg.window must be odd, got {window}")));
    }
    if polyorder >= window || deriv > polyorder {
        return Err(Error::Config(format!(
            "sg.polyorder {polyorder} must be below the window ({window}) and at least the derivative order ({deriv})"
        )));
    }
    let half = (window / 2) as i64;
    let cols = polyorder + 1;
    // Normal equations (A^T A) c = A^T e_row, A[k][j] = offset^j.
    let offsets: Vec<f64> = (-half..=half).map(|k| k as f64).collect();
    let mut gram = vec![vec![0.0; cols]; cols];
    for (i, row) in gram.iter_mut().enumerate() {
        for (j, g) in row.iter_mut().enumerate() {
            *g = offsets.iter().map(|&o| o.powi((i + j) as i32)).sum();
        }
    }
    let inv = invert(gram).ok_or_else(|| Error::Config("singular Savitzky-Golay system".into()))?;
    let factorial: f64 = (1..=deriv).map(|v| v as f64).product();
    Ok(offsets
        .iter()
        .map(|&o| factorial * (0..cols).map(|j| inv[deriv][j] * o.powi(j as i32)).sum::<f64>())
        .collect())
}

fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

/// Per-coefficient Savitzky-Golay derivative of the given order. The series
/// is edge-replicated so the output keeps the input shape.
///
/// The second derivative comes straight from the quadratic fit, not from
/// differentiating the first derivative twice.
pub fn sg_derivative<T: Real>(series: &FrameSeries<T>, order: usize, config: &SgConfig) -> Result<FrameSeries<T>> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidDerivativeOrder(order));
    }
    let weights: Vec<T> = savgol_coefficients(config.window, config.polyorder, order)?.into_iter().map(T::lit).collect();
    let half = config.window / 2;
    Ok(series.map_columns(|col| {
        let n = col.len();
        (0..n)
            .map(|t| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| {
                        let idx = (t + k).saturating_sub(half).min(n - 1);
                        w * col[idx]
                    })
                    .sum()
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(rows: usize, f: impl Fn(f64, usize) -> f64, cols: usize) -> FrameSeries<f64> {
        let data = (0..rows).map(|t| (0..cols).map(|c| f(t as f64, c)).collect()).collect();
        FrameSeries::from_rows(data, 1102, 441, 44100).unwrap()
    }

    #[test]
    fn known_first_derivative_weights() {
        let w = savgol_coefficients(9, 2, 1).unwrap();
        for (k, v) in w.iter().enumerate() {
            assert!((v - (k as f64 - 4.0) / 60.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_and_quadratic_exact() {
        let cfg = SgConfig::default();
        let lin = series(30, |t, c| 3.0 * t + c as f64, 3);
        let d1 = sg_derivative(&lin, 1, &cfg).unwrap();
        let quad = series(30, |t, _| t * t, 2);
        let d2 = sg_derivative(&quad, 2, &cfg).unwrap();
        for t in 4..26 {
            for c in 0..3 {
                assert!((d1.get(t, c) - 3.0).abs() < 1e-9);
            }
            assert!((d2.get(t, 0) - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_gives_zero_everywhere() {
        let s = series(7, |_, _| 5.0, 2);
        for order in [1, 2] {
            let d = sg_derivative(&s, order, &SgConfig::default()).unwrap();
            assert_eq!(d.n_frames(), 7);
            for t in 0..7 {
                assert!(d.get(t, 0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_order() {
        let s = series(12, |t, _| t, 1);
        assert!(matches!(sg_derivative(&s, 3, &SgConfig::default()), Err(Error::InvalidDerivativeOrder(3))));
        assert!(matches!(sg_derivative(&s, 0, &SgConfig::default()), Err(Error::InvalidDerivativeOrder(0))));
    }

    proptest::proptest! {
        #[test]
        fn linear_operator(a in -5.0f64..5.0, b in -5.0f64..5.0, seed in 0u64..1000) {
            use rand::Rng as _;
            let mut rng = crate::seed::rng_for(seed, &[]);
            let x: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sx = series(20, |t, _| x[t as usize], 1);
            let sy = series(20, |t, _| y[t as usize], 1);
            let sc = series(20, |t, _| a * x[t as usize] + b * y[t as usize], 1);
            for order in [1, 2] {
                let (dx, dy, dc) = (
                    sg_derivative(&sx, order, &SgConfig::default()).unwrap(),
                    sg_derivative(&sy, order, &SgConfig::default()).unwrap(),
                    sg_derivative(&sc, order, &SgConfig::default()).unwrap(),
                );
                for t in 0..20 {
                    proptest::prop_assert!((dc.get(t, 0) - a * dx.get(t, 0) - b * dy.get(t, 0)).abs() < 1e-9);
                }
            }
        }
    }
}
