mod common;

use std::time::Instant;

use common::grouped_dataset;
use voxmark_learn::cv::write_summary_csv;
use voxmark_learn::{
    audit, evaluate_algorithms, make_fold_plan, nested_cv, refit_outer, AccessLog, Algorithm, BorutaConfig, CvOptions,
    Stage,
};

fn quick() -> CvOptions {
    CvOptions { budget: 6, boruta: BorutaConfig { max_iter: 20, ..BorutaConfig::default() }, ..CvOptions::default() }
}

#[test]
fn no_test_participant_is_read_while_fitting() {
    let ds = grouped_dataset(30, 17, 3, 6, 1.5, 1);
    let plan = make_fold_plan(&ds, 2).unwrap();
    for alg in Algorithm::ALL {
        let log = AccessLog::new();
        let reports = evaluate_algorithms(&ds, &[alg], &plan, &quick(), 3, &log).unwrap();
        let a = audit(&log, &plan, &ds);
        assert!(a.clean(), "{alg}: {} leaked reads", a.violations);
        assert_eq!(a.folds_seen, 10);
        for stages in &a.stages {
            for s in [Stage::Imputation, Stage::Selection, Stage::Standardization, Stage::Tuning, Stage::Training, Stage::Evaluation] {
                assert!(stages.contains(&s), "{alg}: stage {s:?} never recorded");
            }
        }
        assert!(reports[0].verify());
    }
}

#[test]
fn audit_catches_a_leaky_read() {
    use voxmark_learn::AccessObserver;
    let ds = grouped_dataset(20, 10, 2, 3, 0.0, 2);
    let plan = make_fold_plan(&ds, 1).unwrap();
    let log = AccessLog::new();
    let (_, test) = plan.outer_rows(&ds, 4);
    log.record(4, Stage::Standardization, &test);
    assert_eq!(audit(&log, &plan, &ds).violations, test.len());
}

#[test]
fn strong_effect_is_learned_and_metrics_are_consistent() {
    let ds = grouped_dataset(40, 22, 4, 8, 2.0, 5);
    let plan = make_fold_plan(&ds, 9).unwrap();
    let t = Instant::now();
    let r = nested_cv(&ds, Algorithm::LogReg, &plan, &quick(), 9).unwrap();
    assert!(r.metrics.accuracy >= 70.0, "accuracy {}", r.metrics.accuracy);
    assert!(r.verify());
    assert_eq!(r.predictions.len(), ds.n_samples());
    assert_eq!(r.confusion.total(), ds.n_samples());
    assert!(r.folds.iter().all(|f| f.selected.contains(&"f0".to_string())));
    println!("logreg nested CV in {:?}", t.elapsed());
}

#[test]
fn refit_reproduces_outer_predictions() {
    let ds = grouped_dataset(24, 12, 3, 5, 1.0, 6);
    let plan = make_fold_plan(&ds, 4).unwrap();
    for alg in [Algorithm::GbtB, Algorithm::Svm] {
        let r = nested_cv(&ds, alg, &plan, &quick(), 4).unwrap();
        let x = voxmark_learn::design_matrix(&ds);
        for k in 0..10 {
            let m = refit_outer(&ds, &plan, &r, k).unwrap();
            for p in r.predictions.iter().filter(|p| p.fold == k) {
                assert_eq!(m.output(x.row(p.row)), p.score);
            }
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let ds = grouped_dataset(20, 9, 3, 5, 1.0, 7);
    let plan = make_fold_plan(&ds, 3).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let reports = evaluate_algorithms(&ds, &[Algorithm::Knn, Algorithm::GbtA], &plan, &quick(), 11, &voxmark_learn::NoAudit).unwrap();
            let mut csv = Vec::new();
            write_summary_csv(&reports, &mut csv).unwrap();
            (reports.iter().map(|r| r.to_json().unwrap()).collect::<Vec<_>>(), csv)
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn mismatched_plan_is_rejected() {
    let ds = grouped_dataset(20, 9, 2, 3, 0.0, 8);
    let other = grouped_dataset(22, 9, 2, 3, 0.0, 8);
    let plan = make_fold_plan(&other, 1).unwrap();
    assert!(nested_cv(&ds, Algorithm::Knn, &plan, &quick(), 1).is_err());
}
