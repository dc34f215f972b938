use proptest::prelude::*;
use voxmark_learn::Confusion;

#[test]
fn best_published_row_arithmetic() {
    let c = Confusion { tp: 28, fn_: 4, tn: 14, fp: 8 };
    assert_eq!(c.metrics().rounded(), [77.8, 87.5, 63.6, 82.4]);
}

#[test]
fn all_correct_is_one_hundred_percent() {
    let y = [true, false, true, true, false];
    let m = Confusion::from_predictions(&y, &y).metrics();
    assert_eq!(m.rounded(), [100.0, 100.0, 100.0, 100.0]);
}

#[test]
fn serialized_counts_use_fn_key() {
    let c = Confusion { tp: 1, fn_: 2, tn: 3, fp: 4 };
    let s = serde_json::to_string(&c).unwrap();
    assert_eq!(s, r#"{"tp":1,"fn":2,"tn":3,"fp":4}"#);
}

proptest! {
    #[test]
    fn identities_hold(tp in 1usize..60, fn_ in 0usize..60, tn in 1usize..60, fp in 0usize..60) {
        let m = Confusion { tp, fn_, tn, fp }.metrics();
        let n = (tp + fn_ + tn + fp) as f64;
        prop_assert!((m.accuracy - 100.0 * (tp + tn) as f64 / n).abs() < 1e-12);
        prop_assert!((m.sensitivity - 100.0 * tp as f64 / (tp + fn_) as f64).abs() < 1e-12);
        prop_assert!((m.specificity - 100.0 * tn as f64 / (tn + fp) as f64).abs() < 1e-12);
        prop_assert!((m.f1 - 100.0 * 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64).abs() < 1e-12);
    }
}
