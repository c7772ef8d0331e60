use proptest::prelude::*;
use proptest::test_runner::Config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use softac::cli::InstanceFile;
use softac::dac::{enforce_dac, is_dac, VariableOrder};
use softac::gac::{enforce_ac_underlying, enforce_gac, enumerate_closures, is_gac, GacOptions};
use softac::model::Vcsp;
use softac::oracle::{
    absorbing_elements, brute_equivalent, brute_fairness, brute_optimum, crisp_arc_consistency, OracleCaps,
};
use softac::random::{corpus_instance, random_instance, random_moves, InstanceParams};
use softac::valuation::{verify_structure, Axiom, VerifyMode};
use softac::{Structure, VarId, Valuation};

fn config() -> Config {
    Config {
        cases: 96,
        failure_persistence: None,
        ..Config::default()
    }
}

fn finite_structures() -> Vec<Structure> {
    vec![
        Structure::BoundedSum { max: 5 },
        Structure::BoundedSum { max: 1 },
        Structure::OrderedMax { levels: 3 },
        Structure::DrivingPenalty { max_years: 10 },
        Structure::CappedPrison { cap: 20 },
        Structure::FinancialLife {
            max_loss: 3,
            max_lives: 3,
        },
    ]
}

fn fair_structures() -> Vec<Structure> {
    let mut all = vec![Structure::Weighted];
    all.extend(finite_structures().into_iter().filter(|s| s.is_fair()));
    all
}

fn instance(seed: u64, structure: Structure) -> Vcsp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance(
        &mut rng,
        &InstanceParams {
            structure,
            ..InstanceParams::default()
        },
    )
}

fn binary_instance(seed: u64, structure: Structure) -> Vcsp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance(
        &mut rng,
        &InstanceParams {
            structure,
            ternary_probability: 0.0,
            ..InstanceParams::default()
        },
    )
}

fn caps() -> OracleCaps {
    OracleCaps::default()
}

fn fair_structure() -> impl Strategy<Value = Structure> {
    prop::sample::select(fair_structures())
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn moves_preserve_equivalence(seed in any::<u64>(), s in fair_structure()) {
        let v = instance(seed, s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut w = v.clone();
        for m in random_moves(&mut rng, &v, 20) {
            m.apply(&mut w).unwrap();
            prop_assert!(brute_equivalent(&v, &w, caps()).unwrap(), "{}", m.describe(&v));
        }
    }

    #[test]
    fn delta_and_dense_backends_agree_on_weighted(seed in any::<u64>()) {
        let v = instance(seed, Structure::Weighted);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let moves = random_moves(&mut rng, &v, 20);
        let mut dense = v.clone();
        let mut delta = v.to_delta().unwrap();
        for m in &moves {
            prop_assert_eq!(m.apply(&mut dense).unwrap(), m.apply(&mut delta).unwrap());
        }
        prop_assert_eq!(delta.materialized().unwrap(), dense);
    }

    #[test]
    fn f_min_bounds_the_optimum(seed in any::<u64>(), s in fair_structure()) {
        let v = instance(seed, s);
        let best = brute_optimum(&v, caps()).unwrap();
        prop_assert_eq!(v.valuation_of(&best.assignment).unwrap(), best.valuation);
        prop_assert!(v.f_min().unwrap() <= best.valuation);
        let mut g = v.clone();
        enforce_gac(&mut g, GacOptions::default()).unwrap();
        prop_assert!(g.f_min().unwrap() <= best.valuation);
        prop_assert!(v.f_min().unwrap() <= g.f_min().unwrap());
    }

    #[test]
    fn gac_output_is_gac_and_equivalent(seed in any::<u64>(), s in fair_structure()) {
        let v = instance(seed, s);
        let mut g = v.clone();
        let stats = enforce_gac(&mut g, GacOptions::default()).unwrap();
        prop_assert!(is_gac(&g).unwrap().holds);
        prop_assert!(brute_equivalent(&v, &g, caps()).unwrap());
        prop_assert!(stats.iterations as u128 <= stats.iteration_bound);
    }

    #[test]
    fn gac_is_idempotent(seed in any::<u64>(), s in fair_structure()) {
        let mut g = instance(seed, s);
        enforce_gac(&mut g, GacOptions::default()).unwrap();
        let once = g.clone();
        enforce_gac(&mut g, GacOptions::default()).unwrap();
        prop_assert_eq!(g, once);
    }

    #[test]
    fn dac_output_is_dac_and_equivalent(seed in any::<u64>(), s in fair_structure()) {
        let v = binary_instance(seed, s);
        let order = VariableOrder::identity(v.n());
        let mut d = v.clone();
        let stats = enforce_dac(&mut d, &order).unwrap();
        prop_assert!(is_dac(&d, &order).unwrap().holds);
        prop_assert!(brute_equivalent(&v, &d, caps()).unwrap());
        prop_assert!(stats.calls() <= 2 * v.e() as u64 * v.d() as u64);
    }

    #[test]
    fn dac_is_idempotent_on_weighted(seed in any::<u64>()) {
        let v = binary_instance(seed, Structure::Weighted);
        let order = VariableOrder::identity(v.n());
        let mut d = v.clone();
        enforce_dac(&mut d, &order).unwrap();
        let once = d.materialized().unwrap();
        enforce_dac(&mut d, &order).unwrap();
        prop_assert_eq!(d.materialized().unwrap(), once);
    }

    #[test]
    fn subproblems(seed in any::<u64>(), mask in any::<u8>()) {
        let v = instance(seed, Structure::Weighted);
        let all: Vec<VarId> = v.var_ids().collect();
        prop_assert_eq!(&v.subproblem(&all).unwrap(), &v);
        let j: Vec<VarId> = all.iter().copied().filter(|x| mask & (1 << x.0) != 0).collect();
        let sub = v.subproblem(&j).unwrap();
        let keep: Vec<VarId> = sub.var_ids().collect();
        prop_assert_eq!(sub.subproblem(&keep).unwrap(), sub.clone());
        prop_assert_eq!(sub.n(), j.len());
    }

    #[test]
    fn instance_files_round_trip(seed in any::<u64>(), s in prop::sample::select(finite_structures()), json in any::<bool>()) {
        let v = instance(seed, s);
        let text = InstanceFile::from_problem(&v).unwrap().to_text(json);
        let back = InstanceFile::parse(&text, json, "memory").unwrap().to_problem().unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn crisp_propagation_matches_reference(seed in any::<u64>()) {
        let v = instance(seed, Structure::Weighted);
        let alive = crisp_arc_consistency(&v);
        let mut w = v.clone();
        enforce_ac_underlying(&mut w).unwrap();
        for x in w.var_ids() {
            let kept: Vec<bool> = w.unary(x).iter().map(|&c| c != Valuation::INFINITE).collect();
            prop_assert_eq!(&kept, &alive[x.0]);
        }
        prop_assert!(brute_equivalent(&v, &w, caps()).unwrap());
    }

    #[test]
    fn weighted_axioms_on_samples(seed in any::<u64>()) {
        let report = verify_structure(&Structure::Weighted, VerifyMode::Sampled { count: 200, seed }).unwrap();
        prop_assert!(report.all_passed());
        prop_assert!(report.strictly_monotonic.holds);
        prop_assert!(!report.idempotent.holds);
    }
}

#[test]
fn equivalence_implementations_agree() {
    let p = InstanceParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut differing = 0;
    for k in 0..1000 {
        let v = corpus_instance(4242, k, &p);
        let mut w = v.clone();
        for m in random_moves(&mut rng, &v, 5) {
            m.apply(&mut w).unwrap();
        }
        if k % 2 == 1 {
            let x = VarId(k as usize % v.n());
            let bumped = v.structure().plus(w.unary_cost(x, 0), Valuation::finite(1));
            w.set_unary_cost(x, 0, bumped).unwrap();
        }
        let fast = v.equivalent(&w).unwrap();
        assert_eq!(fast, brute_equivalent(&v, &w, caps()).unwrap(), "pair {k}");
        differing += usize::from(!fast);
    }
    assert!(differing > 100);
}

#[test]
fn fairness_oracle_agrees_with_axiom_scan() {
    for s in finite_structures() {
        let oracle = brute_fairness(&s).unwrap();
        let report = verify_structure(&s, VerifyMode::Exhaustive).unwrap();
        let scan = report.check(Axiom::Fairness);
        assert_eq!(oracle.fair, scan.passed(), "{s}");
        assert_eq!(oracle.fair, s.is_fair(), "{s}");
        assert!(oracle.mismatches.is_empty(), "{s}: {:?}", oracle.mismatches);
        if let Some((beta, alpha)) = oracle.witness {
            assert_eq!(scan.witness, Some(vec![beta, alpha]), "{s}");
        }
    }
}

#[test]
fn self_difference_is_largest_absorbing_below() {
    for s in finite_structures().into_iter().filter(Structure::is_fair) {
        let absorbing = absorbing_elements(&s).unwrap();
        for a in s.elements().unwrap() {
            let expected = absorbing.iter().copied().filter(|&x| x <= a).max().unwrap();
            assert_eq!(s.minus(a, a), expected, "{s} {a}");
            assert_eq!(s.max_absorbing_leq(a).unwrap(), expected, "{s} {a}");
        }
    }
}

#[test]
fn closures_are_gac_and_equivalent() {
    let p = InstanceParams {
        max_vars: 3,
        max_domain: 2,
        max_constraints: 2,
        max_cost: 2,
        ternary_probability: 0.0,
        ..InstanceParams::default()
    };
    for k in 0..40 {
        let v = corpus_instance(5, k, &p);
        let report = enumerate_closures(&v, 4).unwrap();
        for c in &report.closures {
            assert!(is_gac(&c.problem).unwrap().holds, "instance {k}");
            assert!(brute_equivalent(&v, &c.problem, caps()).unwrap(), "instance {k}");
            assert_eq!(c.f_min, c.problem.f_min().unwrap());
        }
    }
}
