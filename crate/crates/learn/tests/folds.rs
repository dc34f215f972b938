mod common;

use std::collections::HashSet;

use common::grouped_dataset;
use proptest::prelude::*;
use voxmark_learn::folds::{make_fold_plan, FoldPlan};

/// Proportional-allocation check: each fold's high count is within one of
/// its size times the overall high fraction.
fn stratified(folds: &[Vec<String>], high: &HashSet<String>, frac: f64) -> bool {
    folds.iter().all(|f| {
        let h = f.iter().filter(|p| high.contains(*p)).count() as f64;
        (h - f.len() as f64 * frac).abs() <= 1.0
    })
}

#[test]
fn fifty_four_participants_split_three_to_four_high() {
    let ds = grouped_dataset(54, 32, 5, 4, 0.0, 1);
    let plan = make_fold_plan(&ds, 11).unwrap();
    let high: HashSet<String> = (0..32).map(|i| format!("P{i:03}")).collect();
    for f in &plan.outer {
        let h = f.iter().filter(|p| high.contains(*p)).count();
        let l = f.len() - h;
        assert!((3..=4).contains(&h) && (2..=3).contains(&l), "fold with {h} high / {l} low");
    }
    plan.check(&ds).unwrap();
}

#[test]
fn same_seed_same_plan() {
    let ds = grouped_dataset(30, 14, 3, 2, 0.0, 2);
    assert_eq!(make_fold_plan(&ds, 5).unwrap(), make_fold_plan(&ds, 5).unwrap());
    assert_ne!(make_fold_plan(&ds, 5).unwrap(), make_fold_plan(&ds, 6).unwrap());
}

#[test]
fn nine_participants_is_an_error() {
    let ds = grouped_dataset(9, 5, 2, 2, 0.0, 3);
    assert!(make_fold_plan(&ds, 1).is_err());
}

#[test]
fn plan_round_trips_through_json() {
    let ds = grouped_dataset(20, 8, 2, 2, 0.0, 4);
    let plan = make_fold_plan(&ds, 3).unwrap();
    assert_eq!(FoldPlan::from_json(&plan.to_json().unwrap()).unwrap(), plan);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn plans_partition_and_stratify(n in 10usize..70, frac in 0.2f64..0.8, seed in 0u64..500) {
        let n_high = ((n as f64 * frac).round() as usize).clamp(1, n - 1);
        let ds = grouped_dataset(n, n_high, 2, 1, 0.0, seed);
        let plan = make_fold_plan(&ds, seed).unwrap();
        prop_assert!(plan.check(&ds).is_ok());
        let high: HashSet<String> = (0..n_high).map(|i| format!("P{i:03}")).collect();
        prop_assert!(stratified(&plan.outer, &high, n_high as f64 / n as f64));
        for (k, inner) in plan.inner.iter().enumerate() {
            let train = n - plan.outer[k].len();
            let h = (0..n_high).filter(|i| !plan.outer[k].contains(&format!("P{i:03}"))).count();
            prop_assert!(stratified(inner, &high, h as f64 / train as f64));
            // Subject-wise: every row of a participant lands on one side.
            let (tr, te) = plan.outer_rows(&ds, k);
            let te_ids: HashSet<&str> = te.iter().map(|&r| ds.samples[r].participant_id.as_str()).collect();
            prop_assert!(tr.iter().all(|&r| !te_ids.contains(ds.samples[r].participant_id.as_str())));
        }
    }
}
