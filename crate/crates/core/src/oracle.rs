//! Brute-force reference implementations.
//!
//! Nothing here calls into the enforcement or transformation code: costs are
//! read straight out of the stored tables (including Δ corrections) and every
//! answer is obtained by plain enumeration. Agreement with the optimized
//! paths is therefore evidence rather than tautology.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Assignment, Constraint, VarId, Vcsp, ASSIGNMENT_CAP};
use crate::valuation::{Structure, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    /// Maximum number of complete assignments enumerated.
    pub assignments: u128,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            assignments: ASSIGNMENT_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimumResult {
    pub valuation: Valuation,
    pub assignment: Assignment,
    pub enumerated: u128,
}

fn sizes_of(v: &Vcsp) -> Vec<usize> {
    v.variables().iter().map(|x| x.domain.labels().len()).collect()
}

fn space(sizes: &[usize], cap: u128, what: &str) -> Result<u128> {
    let mut total: u128 = 1;
    for &d in sizes {
        total = total.saturating_mul(d as u128);
    }
    if total > cap {
        return Err(Error::SizeCap {
            what: what.into(),
            needed: total,
            cap,
        });
    }
    Ok(total)
}

/// The `k`-th complete assignment in row-major order.
fn decode(mut k: u128, sizes: &[usize]) -> Vec<usize> {
    let mut values = vec![0; sizes.len()];
    for (slot, &d) in values.iter_mut().zip(sizes).rev() {
        *slot = (k % d as u128) as usize;
        k /= d as u128;
    }
    values
}

fn table_index(sizes: &[usize], tuple: &[usize]) -> usize {
    let mut index = 0;
    let mut stride = 1;
    for (&value, &d) in tuple.iter().zip(sizes).rev() {
        index += value * stride;
        stride *= d;
    }
    index
}

fn stored_cost(s: &Structure, c: &Constraint, tuple: &[usize]) -> Valuation {
    match c {
        Constraint::Dense(f) => f.table()[table_index(f.sizes(), tuple)],
        Constraint::Delta(d) => {
            let original = d.original();
            let mut up = original.table()[table_index(original.sizes(), tuple)];
            let mut down = s.bottom();
            for (pos, &a) in tuple.iter().enumerate() {
                up = s.plus(up, d.delta_plus(pos)[a]);
                down = s.plus(down, d.delta_minus(pos)[a]);
            }
            s.minus(up, down)
        }
    }
}

fn naive_valuation(v: &Vcsp, values: &[usize]) -> Valuation {
    let s = v.structure();
    let mut total = s.bottom();
    for (k, &a) in values.iter().enumerate() {
        total = s.plus(total, v.unary(VarId(k))[a]);
    }
    for c in v.constraints() {
        let tuple: Vec<usize> = c.scope().iter().map(|x| values[x.0]).collect();
        total = s.plus(total, stored_cost(s, c, &tuple));
    }
    total
}

/// Exhaustive minimization; ties go to the first assignment in row-major
/// order.
pub fn brute_optimum(v: &Vcsp, caps: OracleCaps) -> Result<OptimumResult> {
    let sizes = sizes_of(v);
    let total = space(&sizes, caps.assignments, "optimum enumeration")?;
    let mut best: Option<(Valuation, Vec<usize>)> = None;
    for k in 0..total {
        let values = decode(k, &sizes);
        let cost = naive_valuation(v, &values);
        if best.as_ref().map_or(true, |(b, _)| cost < *b) {
            best = Some((cost, values));
        }
    }
    let (valuation, values) = best.expect("at least one assignment");
    Ok(OptimumResult {
        valuation,
        assignment: values.into_iter().enumerate().map(|(k, a)| (VarId(k), a)).collect(),
        enumerated: total,
    })
}

/// Whether every complete assignment has the same valuation in both problems.
pub fn brute_equivalent(a: &Vcsp, b: &Vcsp, caps: OracleCaps) -> Result<bool> {
    if a.structure() != b.structure() {
        return Err(Error::SignatureMismatch("structure".into()));
    }
    let same_vars = a.variables().len() == b.variables().len()
        && a
            .variables()
            .iter()
            .zip(b.variables())
            .all(|(x, y)| x.name == y.name && x.domain.labels() == y.domain.labels());
    if !same_vars {
        return Err(Error::SignatureMismatch("variables or domains".into()));
    }
    let sizes = sizes_of(a);
    let total = space(&sizes, caps.assignments, "equivalence enumeration")?;
    Ok((0..total).all(|k| {
        let values = decode(k, &sizes);
        naive_valuation(a, &values) == naive_valuation(b, &values)
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FairnessReport {
    pub fair: bool,
    /// Ordered pairs (β, α) with α ≼ β examined.
    pub pairs: u64,
    /// First pair without a maximal difference, β ascending then α descending.
    pub witness: Option<(Valuation, Valuation)>,
    /// Pairs where the structure's ⊖ disagrees with the enumerated maximum.
    pub mismatches: Vec<(Valuation, Valuation)>,
}

/// Computes every set {γ : γ ⊕ α = β} and checks it has a maximum equal to
/// the structure's β ⊖ α.
pub fn brute_fairness(s: &Structure) -> Result<FairnessReport> {
    let e = s
        .elements()
        .ok_or_else(|| Error::Capability(format!("{s} has no finite enumerator")))?;
    let mut report = FairnessReport {
        fair: true,
        pairs: 0,
        witness: None,
        mismatches: Vec::new(),
    };
    for (bi, &beta) in e.iter().enumerate() {
        for &alpha in e[..=bi].iter().rev() {
            report.pairs += 1;
            let max = e.iter().copied().filter(|&g| s.plus(g, alpha) == beta).max();
            match max {
                None => {
                    report.fair = false;
                    if report.witness.is_none() {
                        report.witness = Some((beta, alpha));
                    }
                }
                Some(g) => {
                    if s.difference(beta, alpha).ok() != Some(g) {
                        report.mismatches.push((beta, alpha));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// All α with α ⊕ α = α, ascending.
pub fn absorbing_elements(s: &Structure) -> Result<Vec<Valuation>> {
    let e = s
        .elements()
        .ok_or_else(|| Error::Capability(format!("{s} has no finite enumerator")))?;
    Ok(e.into_iter().filter(|&a| s.plus(a, a) == a).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgebraCheck {
    pub name: &'static str,
    pub cases: u64,
    pub witness: Option<Vec<Valuation>>,
}

impl AlgebraCheck {
    fn new(name: &'static str) -> Self {
        AlgebraCheck {
            name,
            cases: 0,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, case: impl FnOnce() -> Vec<Valuation>) {
        self.cases += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(case());
        }
    }

    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Exhaustive checks of the structural results on fair valuation structures:
/// slice independence, the double-difference identity, the (α⊕β)⊖β
/// dichotomy, the directional-consistency lemma, and exclusivity of
/// idempotence and strict monotonicity.
pub fn algebra_suite(s: &Structure) -> Result<Vec<AlgebraCheck>> {
    if !s.is_fair() {
        return Err(Error::Unfair {
            structure: s.to_string(),
        });
    }
    let e = s
        .elements()
        .ok_or_else(|| Error::Capability(format!("{s} has no finite enumerator")))?;
    let top = s.top();
    let absorbing: Vec<Valuation> = e.iter().copied().filter(|&a| s.plus(a, a) == a).collect();

    let mut slice = AlgebraCheck::new("slice-independence");
    for &gamma in &e {
        for &beta in e.iter().filter(|&&b| b <= gamma) {
            let (sum, diff) = (s.plus(gamma, beta), s.minus(gamma, beta));
            for &a0 in absorbing.iter().filter(|&&a| a <= gamma) {
                for &a1 in absorbing.iter().filter(|&&a| a >= gamma) {
                    let ok = a0 <= sum && sum <= a1 && a0 <= diff && diff <= a1;
                    slice.record(ok, || vec![beta, gamma, a0, a1]);
                }
            }
        }
    }

    let mut double = AlgebraCheck::new("double-difference");
    let mut dichotomy = AlgebraCheck::new("difference-dichotomy");
    for &a in &e {
        for &b in &e {
            let ab = s.plus(a, b);
            let floor = s.minus(ab, ab);
            let lhs = s.minus(s.minus(ab, a), b);
            double.record(lhs == floor, || vec![a, b]);
            let r = s.minus(ab, b);
            let ok = r == a || (r == floor && s.plus(r, r) == r && r > a);
            dichotomy.record(ok, || vec![a, b]);
        }
    }

    let mut lemma = AlgebraCheck::new("directional-lemma");
    for &a in &e {
        for &b in &e {
            for &g in &e {
                if s.plus(s.plus(a, b), g) != a {
                    continue;
                }
                for &a2 in e.iter().filter(|&&x| x >= a) {
                    for &g2 in e.iter().filter(|&&x| x <= g) {
                        let ok = s.plus(s.plus(a2, b), g2) == a2;
                        lemma.record(ok, || vec![a, b, g, a2, g2]);
                    }
                }
            }
        }
    }

    let mut exclusive = AlgebraCheck::new("idempotent-strict-exclusive");
    let idempotent = absorbing.len() == e.len();
    let mut strict = true;
    for &a in &e {
        for &b in e.iter().filter(|&&b| b < a) {
            for &c in e.iter().filter(|&&c| c != top) {
                if s.plus(a, c) <= s.plus(b, c) {
                    strict = false;
                }
            }
        }
    }
    exclusive.record(e.len() <= 2 || !(idempotent && strict), || e.clone());

    Ok(vec![slice, double, dichotomy, lemma, exclusive])
}

/// Plain fixpoint arc consistency on the underlying crisp problem by full
/// sweeps; returns, per variable, which values survive.
pub fn crisp_arc_consistency(v: &Vcsp) -> Vec<Vec<bool>> {
    let s = v.structure();
    let top = s.top();
    let mut alive: Vec<Vec<bool>> = (0..v.n())
        .map(|k| v.unary(VarId(k)).iter().map(|&x| x != top).collect())
        .collect();
    loop {
        let mut changed = false;
        for c in v.constraints() {
            let scope = c.scope();
            let sizes = c.sizes();
            let total: usize = sizes.iter().product();
            for (pos, &x) in scope.iter().enumerate() {
                for a in 0..sizes[pos] {
                    if !alive[x.0][a] {
                        continue;
                    }
                    let supported = (0..total as u128).any(|k| {
                        let t = decode(k, sizes);
                        t[pos] == a
                            && scope.iter().zip(&t).all(|(y, &b)| alive[y.0][b])
                            && stored_cost(s, c, &t) != top
                    });
                    if !supported {
                        alive[x.0][a] = false;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return alive;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostFunction;
    use crate::valuation::{Loss, Penalty};

    fn w(x: u64) -> Valuation {
        Valuation::finite(x)
    }

    const INF: Valuation = Valuation::INFINITE;

    fn fig1a() -> Vcsp {
        let mut p = Vcsp::new(Structure::Weighted);
        let x = p.add_variable("1", ["a", "b"]).unwrap();
        let y = p.add_variable("2", ["a", "b"]).unwrap();
        p.add_constraint(CostFunction::new(vec![x, y], vec![2, 2], vec![INF, w(0), INF, w(1)]).unwrap())
            .unwrap();
        p
    }

    #[test]
    fn decode_is_row_major() {
        assert_eq!(decode(0, &[2, 3]), vec![0, 0]);
        assert_eq!(decode(1, &[2, 3]), vec![0, 1]);
        assert_eq!(decode(5, &[2, 3]), vec![1, 2]);
    }

    #[test]
    fn optimum_of_fig1a() {
        let r = brute_optimum(&fig1a(), OracleCaps::default()).unwrap();
        assert_eq!(r.valuation, w(0));
        assert_eq!(r.assignment, Assignment::from([(VarId(0), 0), (VarId(1), 1)]));
        assert_eq!(r.enumerated, 4);
    }

    #[test]
    fn optimum_of_constraint_free_problem() {
        let mut p = Vcsp::new(Structure::Weighted);
        p.add_variable("x", ["a", "b", "c"]).unwrap();
        p.add_variable("y", ["a", "b"]).unwrap();
        let r = brute_optimum(&p, OracleCaps::default()).unwrap();
        assert_eq!(r.valuation, w(0));
        assert_eq!(r.assignment, Assignment::from([(VarId(0), 0), (VarId(1), 0)]));
    }

    #[test]
    fn optimum_respects_cap() {
        let caps = OracleCaps { assignments: 3 };
        assert!(matches!(brute_optimum(&fig1a(), caps), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn equivalence_oracle() {
        let p = fig1a();
        assert!(brute_equivalent(&p, &p, OracleCaps::default()).unwrap());
        let mut q = p.clone();
        q.set_unary_cost(VarId(0), 1, w(1)).unwrap();
        assert!(!brute_equivalent(&p, &q, OracleCaps::default()).unwrap());
    }

    #[test]
    fn fairness_of_shipped_structures() {
        let r = brute_fairness(&Structure::BoundedSum { max: 5 }).unwrap();
        assert!(r.fair);
        assert_eq!(r.pairs, 21);
        assert!(r.mismatches.is_empty());
        let r = brute_fairness(&Structure::OrderedMax { levels: 3 }).unwrap();
        assert!(r.fair && r.mismatches.is_empty());
        let r = brute_fairness(&Structure::FinancialLife {
            max_loss: 3,
            max_lives: 3,
        })
        .unwrap();
        assert!(!r.fair);
        assert_eq!(
            r.witness,
            Some((
                Valuation::Loss(Loss::Finite { lives: 1, money: 0 }),
                Valuation::Loss(Loss::Finite { lives: 0, money: 3 })
            ))
        );
        assert!(brute_fairness(&Structure::Weighted).is_err());
    }

    #[test]
    fn ordered_max_difference_is_the_larger_argument() {
        let s = Structure::OrderedMax { levels: 3 };
        for b in 0..3 {
            for a in 0..=b {
                assert_eq!(s.difference(Valuation::Level(b), Valuation::Level(a)), Ok(Valuation::Level(b)));
            }
        }
    }

    #[test]
    fn absorbing_counts() {
        assert_eq!(
            absorbing_elements(&Structure::BoundedSum { max: 5 }).unwrap(),
            vec![Valuation::Bounded(0), Valuation::Bounded(5)]
        );
        assert_eq!(
            absorbing_elements(&Structure::DrivingPenalty { max_years: 10 }).unwrap(),
            vec![
                Valuation::Penalty(Penalty::Points(0)),
                Valuation::Penalty(Penalty::Points(12)),
                Valuation::Penalty(Penalty::Forever)
            ]
        );
        for k in 1..=5 {
            assert_eq!(absorbing_elements(&Structure::OrderedMax { levels: k }).unwrap().len(), k as usize);
        }
    }

    #[test]
    fn algebra_suite_on_bounded_sum() {
        for check in algebra_suite(&Structure::BoundedSum { max: 5 }).unwrap() {
            assert!(check.passed(), "{} {:?}", check.name, check.witness);
            assert!(check.cases > 0);
        }
    }

    #[test]
    fn crisp_reference_on_fig1a() {
        let alive = crisp_arc_consistency(&fig1a());
        assert_eq!(alive, vec![vec![true, true], vec![false, true]]);
    }
}
