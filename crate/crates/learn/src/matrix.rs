//! Dense row-major matrices and the per-fold preprocessing steps.

use serde::{Deserialize, Serialize};

/// Row-major `f64` matrix. Missing cells are NaN until imputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix shape mismatch");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(cols.iter().map(|&j| r[j]));
        }
        Matrix { rows: self.rows, cols: cols.len(), data }
    }
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

/// Column medians of the observed cells, fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub medians: Vec<f64>,
}

impl Imputer {
    /// Columns with no observed value impute to 0.
    pub fn fit(x: &Matrix) -> Self {
        let medians = (0..x.cols)
            .map(|j| {
                let mut col: Vec<f64> = (0..x.rows).map(|i| x.get(i, j)).filter(|v| !v.is_nan()).collect();
                median(&mut col).unwrap_or(0.0)
            })
            .collect();
        Imputer { medians }
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for (v, m) in row.iter_mut().zip(&self.medians) {
            if v.is_nan() {
                *v = *m;
            }
        }
    }

    pub fn apply(&self, x: &mut Matrix) {
        let cols = x.cols;
        for row in x.data.chunks_mut(cols) {
            self.apply_row(row);
        }
    }
}

/// z-score statistics. Constant columns get unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows.max(1) as f64;
        let mut mean = vec![0.0; x.cols];
        let mut sd = vec![0.0; x.cols];
        for j in 0..x.cols {
            let m = (0..x.rows).map(|i| x.get(i, j)).sum::<f64>() / n;
            let var = (0..x.rows).map(|i| (x.get(i, j) - m).powi(2)).sum::<f64>() / n;
            mean[j] = m;
            sd[j] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        }
        Scaler { mean, sd }
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.sd) {
            *v = (*v - m) / s;
        }
    }

    pub fn apply(&self, x: &mut Matrix) {
        let cols = x.cols;
        for row in x.data.chunks_mut(cols) {
            self.apply_row(row);
        }
    }
}
