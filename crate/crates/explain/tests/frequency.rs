use voxmark_explain::{common_features, selection_frequency_from, FeatureFrequency};

fn names(n: usize) -> Vec<String> {
    (0..n).map(|j| format!("f{j}")).collect()
}

fn folds(counts: &[(usize, usize)], n_folds: usize) -> Vec<Vec<String>> {
    (0..n_folds)
        .map(|k| counts.iter().filter(|&&(_, c)| k < c).map(|&(j, _)| format!("f{j}")).collect())
        .collect()
}

#[test]
fn six_of_ten_is_robust() {
    let r = selection_frequency_from(&folds(&[(0, 6)], 10), &names(1));
    assert_eq!(r[0].folds_selected, 6);
    assert_eq!(r[0].frequency, 0.6);
    assert!(r[0].robust);
}

#[test]
fn five_of_ten_is_not_robust() {
    let r = selection_frequency_from(&folds(&[(0, 5)], 10), &names(1));
    assert_eq!(r[0].frequency, 0.5);
    assert!(!r[0].robust);
}

#[test]
fn never_selected_is_zero() {
    let r = selection_frequency_from(&folds(&[(0, 10)], 10), &names(2));
    let f1 = r.iter().find(|f| f.name == "f1").unwrap();
    assert_eq!(f1.frequency, 0.0);
    assert!(!f1.robust);
}

#[test]
fn sorted_descending_with_stable_ties() {
    let r = selection_frequency_from(&folds(&[(0, 3), (1, 9), (2, 3), (3, 7)], 10), &names(4));
    let order: Vec<&str> = r.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(order, ["f1", "f3", "f0", "f2"]);
}

fn ff(name: &str, robust: bool, shap: Option<f64>) -> FeatureFrequency {
    FeatureFrequency {
        name: name.into(),
        folds_selected: if robust { 8 } else { 2 },
        n_folds: 10,
        frequency: if robust { 0.8 } else { 0.2 },
        robust,
        mean_abs_shapley: shap,
    }
}

#[test]
fn disjoint_rankings_share_nothing() {
    let a = vec![ff("x", true, Some(1.0))];
    let b = vec![ff("y", true, Some(1.0)), ff("x", false, Some(2.0))];
    let c = common_features(&a, &b);
    assert!(c.features.is_empty());
    assert_eq!((c.fraction_a, c.fraction_b), (0.0, 0.0));
}

#[test]
fn identical_rankings_share_everything() {
    let a = vec![ff("x", true, Some(1.0)), ff("y", true, Some(0.5))];
    let c = common_features(&a, &a);
    assert_eq!(c.features, ["x", "y"]);
    assert_eq!((c.fraction_a, c.fraction_b), (1.0, 1.0));
}

#[test]
fn fractions_weight_by_shapley_mass() {
    let a = vec![ff("x", true, Some(3.0)), ff("y", true, Some(1.0))];
    let b = vec![ff("x", true, Some(1.0)), ff("z", true, Some(1.0)), ff("y", false, None)];
    let c = common_features(&a, &b);
    assert_eq!(c.features, ["x"]);
    assert!((c.fraction_a - 0.75).abs() < 1e-12);
    assert!((c.fraction_b - 0.5).abs() < 1e-12);
}

#[test]
fn fractions_fall_back_to_counts_without_mass() {
    let a = vec![ff("x", true, None), ff("y", true, None), ff("z", true, None), ff("w", true, None)];
    let b = vec![ff("x", true, None)];
    let c = common_features(&a, &b);
    assert_eq!(c.fraction_a, 0.25);
    assert_eq!(c.fraction_b, 1.0);
}
