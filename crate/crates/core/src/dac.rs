//! Directional arc consistency on binary problems, exact solving of
//! tree-structured problems, and a bounded search for f_min-improving
//! pair transformations.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gac::{Check, Violation};
use crate::model::{Assignment, ConstraintId, VarId, Vcsp};
use crate::transforms::{ext, proj, Move};
use crate::valuation::Valuation;

/// A total order on the variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableOrder {
    order: Vec<VarId>,
    position: Vec<usize>,
}

impl VariableOrder {
    pub fn new(order: Vec<VarId>, n: usize) -> Result<Self> {
        if order.len() != n {
            return Err(Error::InvalidOrder(format!("{} variables listed, problem has {n}", order.len())));
        }
        let mut position = vec![usize::MAX; n];
        for (k, v) in order.iter().enumerate() {
            if v.0 >= n {
                return Err(Error::InvalidOrder(format!("unknown variable {}", v.0)));
            }
            if position[v.0] != usize::MAX {
                return Err(Error::InvalidOrder(format!("variable {} listed twice", v.0)));
            }
            position[v.0] = k;
        }
        Ok(VariableOrder { order, position })
    }

    pub fn identity(n: usize) -> Self {
        VariableOrder {
            order: (0..n).map(VarId).collect(),
            position: (0..n).collect(),
        }
    }

    /// Order given by variable names.
    pub fn from_names(v: &Vcsp, names: &[&str]) -> Result<Self> {
        let ids = names
            .iter()
            .map(|name| v.var_by_name(name).ok_or_else(|| Error::UnknownVariable(name.to_string())))
            .collect::<Result<Vec<_>>>()?;
        VariableOrder::new(ids, v.n())
    }

    pub fn order(&self) -> &[VarId] {
        &self.order
    }

    pub fn position(&self, var: VarId) -> usize {
        self.position[var.0]
    }

    pub fn precedes(&self, a: VarId, b: VarId) -> bool {
        self.position[a.0] < self.position[b.0]
    }
}

/// A rooted spanning tree that is exactly the constraint graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeStructure {
    root: VarId,
    parent: Vec<Option<VarId>>,
    children: Vec<Vec<VarId>>,
    bfs: Vec<VarId>,
}

impl TreeStructure {
    /// Roots the constraint graph of `v` at `root`; fails unless it is a tree.
    pub fn from_problem(v: &Vcsp, root: VarId) -> Result<Self> {
        let n = v.n();
        if root.0 >= n {
            return Err(Error::UnknownVariable(root.to_string()));
        }
        require_binary(v)?;
        let mut adjacent: Vec<Vec<VarId>> = vec![Vec::new(); n];
        for c in v.constraints() {
            let (a, b) = (c.scope()[0], c.scope()[1]);
            adjacent[a.0].push(b);
            adjacent[b.0].push(a);
        }
        for list in &mut adjacent {
            list.sort();
        }
        if v.e() + 1 != n {
            return Err(Error::NotATree(format!("{} edges on {n} variables", v.e())));
        }
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        let mut bfs = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        seen[root.0] = true;
        while let Some(x) = queue.pop_front() {
            bfs.push(x);
            for &y in &adjacent[x.0] {
                if !seen[y.0] {
                    seen[y.0] = true;
                    parent[y.0] = Some(x);
                    children[x.0].push(y);
                    queue.push_back(y);
                }
            }
        }
        if bfs.len() != n {
            return Err(Error::NotATree("constraint graph is disconnected".into()));
        }
        Ok(TreeStructure {
            root,
            parent,
            children,
            bfs,
        })
    }

    pub fn root(&self) -> VarId {
        self.root
    }

    pub fn parent(&self, var: VarId) -> Option<VarId> {
        self.parent[var.0]
    }

    pub fn children(&self, var: VarId) -> &[VarId] {
        &self.children[var.0]
    }

    /// Breadth-first order: every parent precedes its children.
    pub fn order(&self) -> VariableOrder {
        VariableOrder::new(self.bfs.clone(), self.bfs.len()).expect("breadth-first order is a permutation")
    }
}

fn require_binary(v: &Vcsp) -> Result<()> {
    if let Some(c) = v.constraints().iter().find(|c| c.arity() != 2) {
        return Err(Error::Capability(format!(
            "directional consistency needs binary constraints, found scope {}",
            v.scope_label(c.scope())
        )));
    }
    if !v.structure().is_fair() {
        return Err(Error::Unfair {
            structure: v.structure().to_string(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DacStats {
    pub ext_calls: u64,
    pub proj_calls: u64,
    /// 2·e·d
    pub call_bound: u64,
}

impl DacStats {
    pub fn calls(&self) -> u64 {
        self.ext_calls + self.proj_calls
    }
}

/// c_i(a) = min_b (c_i(a) ⊕ c_ij(a,b) ⊕ c_j(b)) for every a, with i at
/// scope position `pos_i`.
fn directional_violation(v: &Vcsp, c: ConstraintId, pos_i: usize) -> Result<Option<usize>> {
    let s = v.structure();
    let k = v.constraint(c);
    let (i, j) = (k.scope()[pos_i], k.scope()[1 - pos_i]);
    for a in 0..v.domain_size(i) {
        let unary = v.unary_cost(i, a);
        let mut best: Option<Valuation> = None;
        for b in 0..v.domain_size(j) {
            let t = if pos_i == 0 { [a, b] } else { [b, a] };
            let total = s.combine(s.combine(unary, k.cost(s, &t)?)?, v.unary_cost(j, b))?;
            best = Some(best.map_or(total, |x| x.min(total)));
        }
        if best != Some(unary) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Enforces directional arc consistency along `order`, working on the Δ
/// representation. The result keeps its constraints in Δ form.
pub fn enforce_dac(v: &mut Vcsp, order: &VariableOrder) -> Result<DacStats> {
    require_binary(v)?;
    if order.order().len() != v.n() {
        return Err(Error::InvalidOrder("order does not cover the problem".into()));
    }
    *v = v.to_delta()?;
    let mut stats = DacStats {
        call_bound: 2 * v.e() as u64 * v.d() as u64,
        ..DacStats::default()
    };
    let n = v.n();
    for p in (0..n.saturating_sub(1)).rev() {
        let i = order.order()[p];
        for &j in &order.order()[p + 1..] {
            let Some(c) = v.constraint_id(&[i, j]) else {
                continue;
            };
            for b in 0..v.domain_size(j) {
                ext(v, j, b, c)?;
                stats.ext_calls += 1;
            }
            for a in 0..v.domain_size(i) {
                proj(v, c, i, a)?;
                stats.proj_calls += 1;
            }
            debug_assert!(
                directional_violation(v, c, v.constraint(c).position(i).unwrap())?.is_none(),
                "A({i},{j}) fails right after propagation"
            );
        }
    }
    assert!(stats.calls() <= stats.call_bound, "{} calls exceed 2ed", stats.calls());
    Ok(stats)
}

/// Checks directional arc consistency; the witness is the first (c_ij, i, a)
/// with i before j that fails.
pub fn is_dac(v: &Vcsp, order: &VariableOrder) -> Result<Check> {
    require_binary(v)?;
    for c in v.constraint_ids() {
        let scope = v.constraint(c).scope().to_vec();
        let pos_i = if order.precedes(scope[0], scope[1]) { 0 } else { 1 };
        if let Some(a) = directional_violation(v, c, pos_i)? {
            return Ok(Check::from_witness(Some(Violation::Value {
                scope: scope.iter().map(|x| x.0).collect(),
                var: scope[pos_i].0,
                value: a,
            })));
        }
    }
    Ok(Check::from_witness(None))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSolution {
    pub valuation: Valuation,
    pub assignment: Assignment,
    pub stats: DacStats,
}

/// Solves a tree-structured problem exactly: DAC from the root outwards,
/// then a root-to-leaves witness choosing, for each child, the first value
/// minimizing parent cost ⊕ edge cost ⊕ child cost.
pub fn solve_tree(v: &Vcsp, tree: &TreeStructure) -> Result<TreeSolution> {
    let mut work = v.clone();
    let stats = enforce_dac(&mut work, &tree.order())?;
    let s = *work.structure();
    let root = tree.root();
    let first_min = |costs: &mut dyn Iterator<Item = Result<Valuation>>| -> Result<(usize, Valuation)> {
        let mut best: Option<(usize, Valuation)> = None;
        for (k, c) in costs.enumerate() {
            let c = c?;
            if best.map_or(true, |(_, b)| c < b) {
                best = Some((k, c));
            }
        }
        Ok(best.expect("domains are never empty"))
    };

    let (a0, optimum) = first_min(&mut work.unary(root).iter().map(|&x| Ok(x)))?;
    let mut assignment = Assignment::new();
    assignment.insert(root, a0);
    for &x in tree.order().order() {
        let a = assignment[&x];
        for &y in tree.children(x) {
            let c = work.constraint_id(&[x, y]).expect("tree edges are constraints");
            let pos_x = work.constraint(c).position(x).unwrap();
            let parent_cost = work.unary_cost(x, a);
            let (b, _) = first_min(&mut (0..work.domain_size(y)).map(|b| {
                let t = if pos_x == 0 { [a, b] } else { [b, a] };
                let edge = work.cost(c, &t)?;
                Ok(s.plus(s.plus(parent_cost, edge), work.unary_cost(y, b)))
            }))?;
            assignment.insert(y, b);
        }
    }
    debug_assert_eq!(v.valuation_of(&assignment)?, optimum);
    Ok(TreeSolution {
        valuation: optimum,
        assignment,
        stats,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Improvement {
    /// Variable ids of the pair.
    pub pair: [usize; 2],
    pub moves: Vec<Move>,
    pub f_min: Valuation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IrreducibilityReport {
    pub f_min: Valuation,
    pub pairs: u64,
    pub states: u64,
    /// Every distinct pair state with a larger global f_min, with the first
    /// sequence found reaching it.
    pub improving: Vec<Improvement>,
    /// False when a frontier was subsampled to respect the state cap.
    pub exhaustive: bool,
}

impl IrreducibilityReport {
    pub fn irreducible(&self) -> bool {
        self.improving.is_empty()
    }
}

/// Frontier size above which the search keeps a seeded random subset.
pub const IRREDUCIBILITY_FRONTIER_CAP: usize = 50_000;

/// Searches, for every binary constraint c_ij, all sequences of at most
/// `depth` projections and extensions on {c_i, c_j, c_ij} that change the
/// pair, reporting those raising the problem's f_min.
///
/// Only proj/ext-generated rewrites are explored, so an empty report is
/// evidence of irreducibility rather than a proof.
pub fn check_irreducibility(v: &Vcsp, depth: usize, seed: u64) -> Result<IrreducibilityReport> {
    require_binary(v)?;
    let s = *v.structure();
    let base = v.f_min()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IrreducibilityReport {
        f_min: base,
        pairs: 0,
        states: 0,
        improving: Vec::new(),
        exhaustive: true,
    };

    for c in v.constraint_ids() {
        let (i, j) = (v.constraint(c).scope()[0], v.constraint(c).scope()[1]);
        report.pairs += 1;
        let mut rest = s.bottom();
        for x in v.var_ids().filter(|&x| x != i && x != j) {
            rest = s.combine(rest, *v.unary(x).iter().min().unwrap())?;
        }
        for other in v.constraint_ids().filter(|&o| o != c) {
            rest = s.combine(rest, v.constraint(other).min(&s)?)?;
        }

        let sub = v.subproblem(&[i, j])?;
        let (si, sj) = (VarId(0), VarId(1));
        let sub_scope = sub.constraint(ConstraintId(0)).scope().to_vec();
        let key = |p: &Vcsp| -> Result<Vec<Valuation>> {
            let mut k = p.unary(si).to_vec();
            k.extend_from_slice(p.unary(sj));
            k.extend(p.constraint(ConstraintId(0)).to_dense(&s)?.table().iter().copied());
            Ok(k)
        };
        let mut seen: HashSet<Vec<Valuation>> = HashSet::from([key(&sub)?]);
        let mut frontier: Vec<(Vcsp, Vec<Move>)> = vec![(sub, Vec::new())];

        for _ in 0..depth {
            let mut next_frontier = Vec::new();
            for (state, moves) in &frontier {
                for var in [si, sj] {
                    for a in 0..state.domain_size(var) {
                        let candidates = [
                            Move::Ext {
                                var,
                                value: a,
                                scope: sub_scope.clone(),
                            },
                            Move::Proj {
                                scope: sub_scope.clone(),
                                var,
                                value: a,
                            },
                        ];
                        for m in candidates {
                            let mut next = state.clone();
                            m.apply(&mut next)?;
                            if !seen.insert(key(&next)?) {
                                continue;
                            }
                            report.states += 1;
                            let mut path = moves.clone();
                            path.push(m);
                            let f = s.combine(rest, next.f_min()?)?;
                            if f > base {
                                let original = |x: VarId| if x == si { i } else { j };
                                report.improving.push(Improvement {
                                    pair: [i.0, j.0],
                                    moves: path.iter().map(|m| relabel(m, &original)).collect(),
                                    f_min: f,
                                });
                            }
                            next_frontier.push((next, path));
                        }
                    }
                }
            }
            if next_frontier.len() > IRREDUCIBILITY_FRONTIER_CAP {
                next_frontier.shuffle(&mut rng);
                next_frontier.truncate(IRREDUCIBILITY_FRONTIER_CAP);
                report.exhaustive = false;
            }
            frontier = next_frontier;
        }
    }
    Ok(report)
}

fn relabel(m: &Move, map: &dyn Fn(VarId) -> VarId) -> Move {
    match m {
        Move::Proj { scope, var, value } => Move::Proj {
            scope: scope.iter().map(|&x| map(x)).collect(),
            var: map(*var),
            value: *value,
        },
        Move::Ext { var, value, scope } => Move::Ext {
            var: map(*var),
            value: *value,
            scope: scope.iter().map(|&x| map(x)).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostFunction;
    use crate::valuation::Structure;

    fn w(x: u64) -> Valuation {
        Valuation::finite(x)
    }

    fn fig5a() -> Vcsp {
        let mut p = Vcsp::new(Structure::Weighted);
        let x = p.add_variable("1", ["a", "b"]).unwrap();
        let y = p.add_variable("2", ["a", "b"]).unwrap();
        p.add_constraint(CostFunction::new(vec![x, y], vec![2, 2], vec![w(0), w(0), w(0), w(1)]).unwrap())
            .unwrap();
        p.set_unary_cost(x, 0, w(1)).unwrap();
        p.set_unary_cost(y, 0, w(1)).unwrap();
        p
    }

    fn order_21(p: &Vcsp) -> VariableOrder {
        VariableOrder::from_names(p, &["2", "1"]).unwrap()
    }

    #[test]
    fn order_validation() {
        assert!(VariableOrder::new(vec![VarId(0), VarId(0)], 2).is_err());
        assert!(VariableOrder::new(vec![VarId(0)], 2).is_err());
        assert!(VariableOrder::new(vec![VarId(2), VarId(0)], 2).is_err());
        let o = VariableOrder::new(vec![VarId(1), VarId(0)], 2).unwrap();
        assert!(o.precedes(VarId(1), VarId(0)));
    }

    #[test]
    fn dac_pools_costs_on_the_first_variable() {
        let mut p = fig5a();
        let stats = enforce_dac(&mut p, &order_21(&fig5a())).unwrap();
        assert_eq!(p.unary(VarId(1)), &[w(1), w(1)]);
        assert_eq!(p.f_min(), Ok(w(1)));
        assert_eq!(stats.calls(), 4);
        assert_eq!(stats.call_bound, 4);
        assert!(is_dac(&p, &order_21(&p)).unwrap().holds);
        assert!(p.equivalent(&fig5a()).unwrap());
    }

    #[test]
    fn dac_witness_on_fig5a() {
        let p = fig5a();
        let check = is_dac(&p, &order_21(&p)).unwrap();
        assert_eq!(
            check.witness,
            Some(Violation::Value {
                scope: vec![0, 1],
                var: 1,
                value: 1
            })
        );
    }

    #[test]
    fn dac_without_binary_constraints_is_a_no_op() {
        let mut p = Vcsp::new(Structure::Weighted);
        let x = p.add_variable("x", ["a", "b"]).unwrap();
        p.set_unary_cost(x, 1, w(3)).unwrap();
        let before = p.clone();
        let stats = enforce_dac(&mut p, &VariableOrder::identity(1)).unwrap();
        assert_eq!(stats.calls(), 0);
        assert_eq!(p, before);
        assert!(is_dac(&p, &VariableOrder::identity(1)).unwrap().holds);
    }

    #[test]
    fn dac_rejects_ternary_constraints() {
        let mut p = Vcsp::new(Structure::Weighted);
        let ids: Vec<VarId> = (0..3).map(|k| p.add_variable(k.to_string(), ["a"]).unwrap()).collect();
        p.add_constraint(CostFunction::filled(ids.clone(), vec![1, 1, 1], w(0)).unwrap())
            .unwrap();
        assert!(matches!(
            enforce_dac(&mut p, &VariableOrder::identity(3)),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn single_variable_tree() {
        let mut p = Vcsp::new(Structure::Weighted);
        let x = p.add_variable("1", ["a", "b"]).unwrap();
        p.set_unary_cost(x, 0, w(2)).unwrap();
        p.set_unary_cost(x, 1, w(5)).unwrap();
        let tree = TreeStructure::from_problem(&p, x).unwrap();
        let sol = solve_tree(&p, &tree).unwrap();
        assert_eq!(sol.valuation, w(2));
        assert_eq!(sol.assignment, Assignment::from([(x, 0)]));
    }

    #[test]
    fn fig5a_tree_rooted_at_second_variable() {
        let p = fig5a();
        let tree = TreeStructure::from_problem(&p, VarId(1)).unwrap();
        let sol = solve_tree(&p, &tree).unwrap();
        assert_eq!(sol.valuation, w(1));
        assert_eq!(sol.assignment, Assignment::from([(VarId(1), 0), (VarId(0), 1)]));
        assert_eq!(p.valuation_of(&sol.assignment), Ok(w(1)));
    }

    #[test]
    fn cycles_are_not_trees() {
        let mut p = Vcsp::new(Structure::Weighted);
        let ids: Vec<VarId> = (0..3).map(|k| p.add_variable(k.to_string(), ["a"]).unwrap()).collect();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            p.add_constraint(CostFunction::filled(vec![ids[a], ids[b]], vec![1, 1], w(0)).unwrap())
                .unwrap();
        }
        assert!(matches!(TreeStructure::from_problem(&p, ids[0]), Err(Error::NotATree(_))));
    }

    #[test]
    fn fig5a_has_an_improving_pair_sequence() {
        let p = fig5a();
        let report = check_irreducibility(&p, 2, 0).unwrap();
        assert!(!report.irreducible());
        let expected = vec![
            Move::Ext {
                var: VarId(0),
                value: 0,
                scope: vec![VarId(0), VarId(1)],
            },
            Move::Proj {
                scope: vec![VarId(0), VarId(1)],
                var: VarId(1),
                value: 1,
            },
        ];
        assert!(report.improving.iter().any(|imp| imp.moves == expected && imp.f_min == w(1)));
    }

    #[test]
    fn dac_output_is_irreducible() {
        let mut p = fig5a();
        enforce_dac(&mut p, &order_21(&fig5a())).unwrap();
        let report = check_irreducibility(&p, 4, 0).unwrap();
        assert!(report.irreducible(), "{:?}", report.improving);
        assert!(report.exhaustive);
    }

    #[test]
    fn all_bottom_problem_is_irreducible() {
        let mut p = Vcsp::new(Structure::Weighted);
        let x = p.add_variable("1", ["a", "b"]).unwrap();
        let y = p.add_variable("2", ["a", "b"]).unwrap();
        p.add_constraint(CostFunction::filled(vec![x, y], vec![2, 2], w(0)).unwrap())
            .unwrap();
        let report = check_irreducibility(&p, 3, 0).unwrap();
        assert!(report.irreducible());
        assert_eq!(report.states, 0);
    }
}
