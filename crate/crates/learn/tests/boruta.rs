mod common;

use std::time::Instant;

use common::{oracle_accuracy, planted};
use rand::Rng;
use rand_distr::StandardNormal;
use voxmark_core::seed::rng_for;
use voxmark_learn::{boruta_select, BorutaConfig, Decision, Matrix};

#[test]
fn planted_features_are_confirmed_and_noise_rejected() {
    let start = Instant::now();
    let mut good = 0;
    for seed in 0..10 {
        let (x, y) = planted(200, seed);
        assert!(oracle_accuracy(&x, &y) > 0.9, "generator oracle below 90% for seed {seed}");
        let r = boruta_select(&x, &y, &BorutaConfig::default(), seed);
        let informative = (0..3).all(|j| r.decisions[j] == Decision::Confirmed);
        let rejected = (3..45).filter(|&j| r.decisions[j] == Decision::Rejected).count();
        println!("seed {seed}: informative {informative}, rejected {rejected}/42, iterations {}", r.iterations);
        if informative && rejected >= 40 {
            good += 1;
        }
    }
    assert!(good >= 9, "only {good}/10 seeds passed");
    assert!(start.elapsed().as_secs() < 120);
}

#[test]
fn independent_labels_confirm_almost_nothing() {
    let mut total = 0;
    for seed in 0..5 {
        let mut rng = rng_for(seed, &[0x33]);
        let rows: Vec<Vec<f64>> = (0..150).map(|_| (0..30).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let y: Vec<bool> = (0..150).map(|_| rng.gen()).collect();
        let r = boruta_select(&Matrix::from_rows(&rows), &y, &BorutaConfig::default(), seed);
        total += r.confirmed().len();
    }
    assert!(total <= 2 * 5, "{total} false confirmations over 5 null datasets");
}

#[test]
fn separating_feature_is_confirmed() {
    let mut rng = rng_for(4, &[]);
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|i| {
            let mut r: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
            r[7] = if i % 2 == 0 { 1.0 + rng.gen::<f64>() } else { -1.0 - rng.gen::<f64>() };
            r
        })
        .collect();
    let y: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
    let r = boruta_select(&Matrix::from_rows(&rows), &y, &BorutaConfig::default(), 1);
    assert_eq!(r.decisions[7], Decision::Confirmed);
    assert!(r.confirmed().iter().all(|&j| j < 10));
}

#[test]
fn output_is_deterministic() {
    let (x, y) = planted(120, 3);
    let cfg = BorutaConfig { n_trees: 50, ..BorutaConfig::default() };
    assert_eq!(boruta_select(&x, &y, &cfg, 5), boruta_select(&x, &y, &cfg, 5));
}
