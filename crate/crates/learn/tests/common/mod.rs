#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use voxmark_core::corpus::GroupLabel;
use voxmark_core::features::{Dataset, DatasetMode, Sample};
use voxmark_core::seed::rng_for;
use voxmark_learn::Matrix;

/// 45 standard-normal columns. y is the majority vote of [x_k > 0] over the
/// first three columns, flipped with probability 0.05.
pub fn planted(n: usize, seed: u64) -> (Matrix, Vec<bool>) {
    let mut rng = rng_for(seed, &[0x9]);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let r: Vec<f64> = (0..45).map(|_| rng.sample(StandardNormal)).collect();
        let votes = r[..3].iter().filter(|&&v| v > 0.0).count();
        let flip = rng.gen::<f64>() < 0.05;
        y.push((votes >= 2) != flip);
        rows.push(r);
    }
    (Matrix::from_rows(&rows), y)
}

/// Accuracy of the planted rule applied to the informative columns only.
pub fn oracle_accuracy(x: &Matrix, y: &[bool]) -> f64 {
    let hits = (0..x.rows)
        .filter(|&i| ((0..3).filter(|&j| x.get(i, j) > 0.0).count() >= 2) == y[i])
        .count();
    hits as f64 / x.rows as f64
}

/// Participant-structured dataset: `n_part` participants with `per` rows
/// each; the first `n_high` are high. Column 0 carries a group shift of
/// `effect` SDs, the rest is noise; a few cells are missing.
pub fn grouped_dataset(n_part: usize, n_high: usize, per: usize, p: usize, effect: f64, seed: u64) -> Dataset {
    let mut rng = rng_for(seed, &[0x7]);
    let mut samples = Vec::new();
    for i in 0..n_part {
        let high = i < n_high;
        let level: f64 = rng.sample::<f64, _>(StandardNormal) * 0.5;
        for q in 0..per {
            let values = (0..p)
                .map(|j| {
                    if rng.gen::<f64>() < 0.02 {
                        return None;
                    }
                    let z: f64 = rng.sample(StandardNormal);
                    Some(if j == 0 { z + level + if high { effect } else { 0.0 } } else { z })
                })
                .collect();
            samples.push(Sample {
                participant_id: format!("P{i:03}"),
                question_id: Some(format!("q{q}")),
                ecog_score: if high { 2.5 } else { 1.2 },
                group: if high { GroupLabel::High } else { GroupLabel::Low },
                values,
            });
        }
    }
    Dataset {
        mode: DatasetMode::Cognitive,
        feature_names: (0..p).map(|j| format!("f{j}")).collect(),
        samples,
        excluded: 0,
    }
}
