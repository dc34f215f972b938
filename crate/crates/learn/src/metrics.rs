//! Confusion counts and the four reported metrics. High is the positive class.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl Confusion {
    pub fn from_predictions(actual: &[bool], predicted: &[bool]) -> Self {
        assert_eq!(actual.len(), predicted.len());
        let mut c = Confusion::default();
        for (&a, &p) in actual.iter().zip(predicted) {
            match (a, p) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.tn + self.fp
    }

    pub fn metrics(&self) -> Metrics {
        Metrics::from(*self)
    }
}

impl AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        self.tp += o.tp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
        self.fp += o.fp;
    }
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Percentages. A ratio with an empty denominator is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub f1: f64,
}

impl From<Confusion> for Metrics {
    fn from(c: Confusion) -> Self {
        Metrics {
            accuracy: pct(c.tp + c.tn, c.total()),
            sensitivity: pct(c.tp, c.tp + c.fn_),
            specificity: pct(c.tn, c.tn + c.fp),
            f1: pct(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        }
    }
}

impl Metrics {
    /// Values rounded to one decimal, as printed in result tables.
    pub fn rounded(&self) -> [f64; 4] {
        let r = |v: f64| (v * 10.0).round() / 10.0;
        [r(self.accuracy), r(self.sensitivity), r(self.specificity), r(self.f1)]
    }
}
