use proptest::prelude::*;
use voxmark_learn::space::{ConfigExt, Domain, Param};
use voxmark_learn::tpe::{best, minimize, random_search};
use voxmark_learn::{tpe_suggest, Algorithm, Config, HyperSpace, TpeConfig};

fn line() -> HyperSpace {
    HyperSpace { params: vec![Param { name: "x".into(), domain: Domain::Float { lo: 0.0, hi: 10.0, log: false } }] }
}

fn quadratic(c: &Config) -> f64 {
    (c.float("x").unwrap() - 3.0).powi(2)
}

#[test]
fn quadratic_minimum_found_and_beats_random_search() {
    let mut wins = 0;
    for seed in 0..10 {
        let tpe = minimize(&line(), 60, seed, &TpeConfig::default(), quadratic);
        let rnd = random_search(&line(), 60, seed, quadratic);
        let (bt, br) = (best(&tpe).unwrap(), best(&rnd).unwrap());
        let x = bt.0.float("x").unwrap();
        assert!((x - 3.0).abs() <= 0.3, "seed {seed}: best x = {x}");
        if bt.1 <= br.1 {
            wins += 1;
        }
    }
    assert!(wins >= 8, "TPE matched random search in only {wins}/10 seeds");
}

#[test]
fn empty_history_gives_in_domain_startup_point() {
    for a in Algorithm::ALL {
        let space = HyperSpace::with_boruta(a);
        let c = tpe_suggest(&[], &space, 1, &TpeConfig::default());
        assert!(space.contains(&c), "{a}: {c:?}");
    }
}

#[test]
fn equal_losses_fall_back_to_random_in_domain() {
    let space = HyperSpace::with_boruta(Algorithm::GbtA);
    let history: Vec<(Config, f64)> = (0..15).map(|i| (tpe_suggest(&[], &space, i, &TpeConfig::default()), 0.5)).collect();
    let c = tpe_suggest(&history, &space, 3, &TpeConfig::default());
    assert!(space.contains(&c));
}

#[test]
fn suggestion_is_deterministic() {
    let space = HyperSpace::with_boruta(Algorithm::Svm);
    let cfg = TpeConfig::default();
    let h = minimize(&space, 14, 9, &cfg, |c| c.float("C").unwrap().ln().abs());
    assert_eq!(tpe_suggest(&h, &space, 9, &cfg), tpe_suggest(&h, &space, 9, &cfg));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn suggestions_stay_in_domain(seed in 0u64..1000, alg in 0usize..5, n in 0usize..25) {
        let space = HyperSpace::with_boruta(Algorithm::ALL[alg]);
        let cfg = TpeConfig::default();
        let h = minimize(&space, n, seed, &cfg, |c| (seed as f64 * 0.37 + c.len() as f64).sin() + c.values().map(|v| v.to_string().len() as f64).sum::<f64>() * 0.01);
        for (c, _) in &h {
            prop_assert!(space.contains(c));
        }
        prop_assert!(space.contains(&tpe_suggest(&h, &space, seed, &cfg)));
    }
}
