//! Seeded random problem generators used by tests and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CostFunction, VarId, Vcsp};
use crate::transforms::Move;
use crate::valuation::{Structure, Valuation};

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceParams {
    pub structure: Structure,
    pub max_vars: usize,
    pub max_domain: usize,
    pub max_constraints: usize,
    /// Largest finite integer cost drawn.
    pub max_cost: u64,
    /// Probability a drawn cost is ⊤.
    pub top_probability: f64,
    /// Probability a constraint is ternary rather than binary.
    pub ternary_probability: f64,
    /// Probability a unary cost is non-⊥.
    pub unary_probability: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            structure: Structure::Weighted,
            max_vars: 5,
            max_domain: 3,
            max_constraints: 6,
            max_cost: 4,
            top_probability: 0.1,
            ternary_probability: 0.2,
            unary_probability: 0.3,
        }
    }
}

/// Draws a cost of `s`: ⊤ with probability `top`, else an integer in
/// 0..=max_cost (for integer-valued structures) or a uniform element.
pub fn random_cost<R: Rng + ?Sized>(s: &Structure, rng: &mut R, max_cost: u64, top: f64) -> Valuation {
    if rng.gen_bool(top) {
        return s.top();
    }
    match s {
        Structure::Weighted => Valuation::finite(rng.gen_range(0..=max_cost)),
        Structure::BoundedSum { max } => Valuation::Bounded(rng.gen_range(0..=(max_cost as u32).min(*max))),
        Structure::OrderedMax { levels } => Valuation::Level(rng.gen_range(0..*levels)),
        _ => s.sample(rng),
    }
}

fn random_domains<R: Rng + ?Sized>(rng: &mut R, p: &InstanceParams, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(1..=p.max_domain)).collect()
}

fn labels(d: usize) -> Vec<String> {
    (0..d).map(|k| ((b'a' + k as u8) as char).to_string()).collect()
}

fn fill<R: Rng + ?Sized>(rng: &mut R, p: &InstanceParams, v: &mut Vcsp, scope: Vec<VarId>) {
    let sizes: Vec<usize> = scope.iter().map(|&x| v.domain_size(x)).collect();
    let len = sizes.iter().product();
    let table = (0..len)
        .map(|_| random_cost(&p.structure, rng, p.max_cost, p.top_probability))
        .collect();
    let c = CostFunction::new(scope, sizes, table).expect("generated table is well formed");
    v.add_constraint(c).expect("generated scopes are distinct");
}

fn random_unary<R: Rng + ?Sized>(rng: &mut R, p: &InstanceParams, v: &mut Vcsp) {
    for x in v.var_ids().collect::<Vec<_>>() {
        for a in 0..v.domain_size(x) {
            if rng.gen_bool(p.unary_probability) {
                let cost = random_cost(&p.structure, rng, p.max_cost, p.top_probability);
                v.set_unary_cost(x, a, cost).expect("generated cost is valid");
            }
        }
    }
}

/// A random problem with 2..=max_vars variables, unary costs and up to
/// max_constraints binary or ternary constraints over distinct scopes.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, p: &InstanceParams) -> Vcsp {
    let n = rng.gen_range(2..=p.max_vars.max(2));
    let mut v = Vcsp::new(p.structure);
    for (k, d) in random_domains(rng, p, n).into_iter().enumerate() {
        v.add_variable(format!("{}", k + 1), labels(d)).expect("fresh name");
    }
    random_unary(rng, p, &mut v);

    let mut scopes: Vec<Vec<VarId>> = Vec::new();
    let e = rng.gen_range(0..=p.max_constraints);
    let mut attempts = 0;
    while scopes.len() < e && attempts < 50 {
        attempts += 1;
        let arity = if n >= 3 && rng.gen_bool(p.ternary_probability) { 3 } else { 2 };
        let mut vars: Vec<VarId> = (0..n).map(VarId).collect();
        vars.shuffle(rng);
        vars.truncate(arity);
        let mut key = vars.clone();
        key.sort();
        if scopes.iter().any(|s| {
            let mut k = s.clone();
            k.sort();
            k == key
        }) {
            continue;
        }
        scopes.push(vars);
    }
    for scope in scopes {
        fill(rng, p, &mut v, scope);
    }
    v
}

/// A random tree-structured binary problem with 1..=max_vars variables.
/// Variable k > 0 is attached to a uniformly chosen earlier variable.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, p: &InstanceParams) -> Vcsp {
    let n = rng.gen_range(1..=p.max_vars.max(1));
    let mut v = Vcsp::new(p.structure);
    for (k, d) in random_domains(rng, p, n).into_iter().enumerate() {
        v.add_variable(format!("{}", k + 1), labels(d)).expect("fresh name");
    }
    random_unary(rng, p, &mut v);
    for k in 1..n {
        let parent = rng.gen_range(0..k);
        let scope = if rng.gen_bool(0.5) {
            vec![VarId(parent), VarId(k)]
        } else {
            vec![VarId(k), VarId(parent)]
        };
        fill(rng, p, &mut v, scope);
    }
    v
}

/// Up to `max_len` random projections and extensions over the constraints
/// of `v`. Empty when `v` has no non-unary constraint.
pub fn random_moves<R: Rng + ?Sized>(rng: &mut R, v: &Vcsp, max_len: usize) -> Vec<Move> {
    if v.e() == 0 {
        return Vec::new();
    }
    let len = rng.gen_range(1..=max_len.max(1));
    (0..len)
        .map(|_| {
            let c = v.constraints()[rng.gen_range(0..v.e())].scope().to_vec();
            let var = c[rng.gen_range(0..c.len())];
            let value = rng.gen_range(0..v.domain_size(var));
            if rng.gen_bool(0.5) {
                Move::Proj { scope: c, var, value }
            } else {
                Move::Ext { var, value, scope: c }
            }
        })
        .collect()
}

/// The `index`-th instance of the reproducible corpus for `seed`.
pub fn corpus_instance(seed: u64, index: u64, p: &InstanceParams) -> Vcsp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    random_instance(&mut rng, p)
}

/// The `index`-th tree of the reproducible corpus for `seed`.
pub fn corpus_tree(seed: u64, index: u64, p: &InstanceParams) -> Vcsp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    random_tree(&mut rng, p)
}
