use softac::cli::load_instance;
use softac::gac::{enforce_gac, GacOptions};
use softac::oracle::{brute_equivalent, brute_optimum, OracleCaps};
use softac::transforms::proj;
use softac::{Assignment, ConstraintId, Valuation, VarId, Vcsp};

fn fixture(name: &str) -> Vcsp {
    load_instance(name).unwrap().problem
}

fn w(x: u64) -> Valuation {
    Valuation::finite(x)
}

const INF: Valuation = Valuation::INFINITE;

#[test]
fn assignment_valuations() {
    let fig1a = fixture("fig1a");
    assert_eq!(fig1a.valuation_of(&Assignment::from([(VarId(0), 1), (VarId(1), 1)])), Ok(w(1)));
    assert_eq!(fig1a.valuation_of(&Assignment::new()), Ok(w(0)));
    let fig5a = fixture("fig5a");
    assert_eq!(fig5a.valuation_of(&Assignment::from([(VarId(0), 0), (VarId(1), 1)])), Ok(w(1)));
}

#[test]
fn raising_a_unary_cost_breaks_equivalence() {
    let fig1a = fixture("fig1a");
    let mut raised = fig1a.clone();
    raised.set_unary_cost(VarId(0), 1, w(1)).unwrap();
    assert_eq!(fig1a.equivalent(&raised), Ok(false));
    assert_eq!(fig1a.equivalent(&fixture("fig1b")), Ok(true));
}

#[test]
fn optima_of_small_fixtures() {
    let fig1a = brute_optimum(&fixture("fig1a"), OracleCaps::default()).unwrap();
    assert_eq!(fig1a.valuation, w(0));
    assert_eq!(fig1a.assignment, Assignment::from([(VarId(0), 0), (VarId(1), 1)]));
    let fig5a = brute_optimum(&fixture("fig5a"), OracleCaps::default()).unwrap();
    assert_eq!(fig5a.valuation, w(1));
    assert_eq!(fig5a.assignment, Assignment::from([(VarId(0), 0), (VarId(1), 1)]));
}

#[test]
fn middle_pair_of_the_chain_is_the_propagated_pair() {
    let chain = fixture("fig2a");
    let sub = chain.subproblem(&[VarId(1), VarId(2)]).unwrap();
    let mut propagated = fixture("fig1a");
    proj(&mut propagated, ConstraintId(0), VarId(0), 1).unwrap();
    proj(&mut propagated, ConstraintId(0), VarId(1), 0).unwrap();
    assert_eq!(sub.unary(VarId(0)), propagated.unary(VarId(0)));
    assert_eq!(sub.unary(VarId(1)), propagated.unary(VarId(1)));
    let table = |v: &Vcsp| -> Vec<Valuation> {
        [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|t| v.cost(ConstraintId(0), t).unwrap()).collect()
    };
    assert_eq!(table(&sub), table(&propagated));
    assert!(brute_equivalent(&sub, &fixture("fig1a"), OracleCaps::default()).unwrap());
}

#[test]
fn chain_propagation_forbids_the_last_value() {
    let chain = fixture("fig2a");
    let mut g = chain.clone();
    enforce_gac(&mut g, GacOptions::default()).unwrap();
    assert_eq!(g.unary(VarId(3)), &[w(0), INF]);
    assert_eq!(g.unary(VarId(2)), &[INF, w(0)]);
    assert!(brute_equivalent(&chain, &g, OracleCaps::default()).unwrap());
}

#[test]
fn lower_bound_before_and_after_directional_propagation() {
    let fig5a = fixture("fig5a");
    assert_eq!(fig5a.f_min(), Ok(w(0)));
    let mut d = fig5a.clone();
    let order = softac::dac::VariableOrder::from_names(&fig5a, &["2", "1"]).unwrap();
    softac::dac::enforce_dac(&mut d, &order).unwrap();
    assert_eq!(d.f_min(), Ok(w(1)));
}
