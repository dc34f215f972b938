//! k-nearest neighbours.

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weights {
    Uniform,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Manhattan,
    /// Minkowski distance with p = 3.
    Minkowski3,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let it = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Metric::Euclidean => it.map(|d| d * d).sum::<f64>().sqrt(),
            Metric::Manhattan => it.sum(),
            Metric::Minkowski3 => it.map(|d| d * d * d).sum::<f64>().cbrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    pub k: usize,
    pub weights: Weights,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    pub params: KnnParams,
    x: Matrix,
    y: Vec<bool>,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[bool], params: KnnParams) -> Self {
        Knn { params, x: x.clone(), y: y.to_vec() }
    }

    /// Weighted fraction of high-group neighbours. Distance ties keep the
    /// earlier training row.
    pub fn decision(&self, row: &[f64]) -> f64 {
        let k = self.params.k.clamp(1, self.x.rows);
        let mut d: Vec<(f64, usize)> = (0..self.x.rows).map(|i| (self.params.metric.distance(self.x.row(i), row), i)).collect();
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nn = &d[..k];
        let weights: Vec<f64> = match self.params.weights {
            Weights::Uniform => vec![1.0; k],
            Weights::Distance if nn.iter().any(|n| n.0 == 0.0) => nn.iter().map(|n| if n.0 == 0.0 { 1.0 } else { 0.0 }).collect(),
            Weights::Distance => nn.iter().map(|n| 1.0 / n.0).collect(),
        };
        let total: f64 = weights.iter().sum();
        let high: f64 = nn.iter().zip(&weights).filter(|(n, _)| self.y[n.1]).map(|(_, w)| w).sum();
        high / total
    }
}
