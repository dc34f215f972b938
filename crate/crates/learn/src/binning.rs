//! Quantile binning shared by the forest and the boosting engine.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Per-column split thresholds. A value `v` falls in bin `b` where `b` is the
/// number of thresholds strictly below `v`, so `bin ≤ b ⇔ v ≤ thresholds[b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binner {
    pub thresholds: Vec<Vec<f64>>,
}

impl Binner {
    pub fn fit(x: &Matrix, max_bins: usize) -> Self {
        assert!((2..=256).contains(&max_bins));
        let thresholds = (0..x.cols)
            .map(|j| {
                let mut col = x.column(j);
                col.retain(|v| !v.is_nan());
                col.sort_by(f64::total_cmp);
                col.dedup();
                if col.len() <= 1 {
                    return Vec::new();
                }
                if col.len() <= max_bins {
                    return col.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                }
                let mut t: Vec<f64> = (1..max_bins)
                    .map(|b| {
                        let pos = b * (col.len() - 1) / max_bins;
                        0.5 * (col[pos] + col[pos + 1])
                    })
                    .collect();
                t.dedup();
                t
            })
            .collect();
        Binner { thresholds }
    }

    pub fn n_bins(&self, j: usize) -> usize {
        self.thresholds[j].len() + 1
    }

    #[inline]
    pub fn bin(&self, j: usize, v: f64) -> u8 {
        self.thresholds[j].partition_point(|&t| t < v) as u8
    }

    /// Column-major bin codes.
    pub fn transform(&self, x: &Matrix) -> Vec<u8> {
        let mut codes = vec![0u8; x.rows * x.cols];
        for j in 0..x.cols {
            for i in 0..x.rows {
                codes[j * x.rows + i] = self.bin(j, x.get(i, j));
            }
        }
        codes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn few_distinct_values_get_one_bin_each() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![2.0], vec![5.0]]);
        let b = Binner::fit(&x, 32);
        assert_eq!(b.thresholds[0], vec![1.5, 3.5]);
        assert_eq!(b.transform(&x), vec![0, 1, 1, 2]);
    }

    #[test]
    fn bin_count_is_capped() {
        let rows: Vec<Vec<f64>> = (0..1000).map(|i| vec![i as f64]).collect();
        let b = Binner::fit(&Matrix::from_rows(&rows), 32);
        assert!(b.n_bins(0) <= 32);
        let codes = b.transform(&Matrix::from_rows(&rows));
        assert!(codes.windows(2).all(|w| w[0] <= w[1]));
    }
}
