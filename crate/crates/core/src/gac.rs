//! Generalized soft arc consistency: checkers, the queue-driven fixpoint
//! algorithm, the crisp shortcut for strictly monotonic structures, and a
//! bounded enumeration of the (non-unique) closures.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{tuples, tuples_with, ConstraintId, CostFunction, VarId, Vcsp};
use crate::transforms::{locate, proj, Move};
use crate::valuation::{Structure, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntryScope {
    Unary(VarId),
    Constraint(ConstraintId),
}

/// A cost that changed: `recorded` is the value written at enqueue time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueueEntry {
    pub tuple: Vec<usize>,
    pub scope: EntryScope,
    pub recorded: Valuation,
}

#[derive(Clone, Debug, Default)]
pub struct PropagationQueue {
    entries: VecDeque<QueueEntry>,
    pushed: u64,
}

impl PropagationQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: QueueEntry) {
        self.pushed += 1;
        self.entries.push_back(entry);
    }

    pub fn pop(&mut self) -> Option<QueueEntry> {
        self.entries.pop_front()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries pushed over the queue's lifetime.
    pub fn pushed(&self) -> u64 {
        self.pushed
    }
}

/// ProjAC: projects the row minimum onto c_i(a) only when that strictly
/// increases it. Returns whether the problem changed.
pub fn proj_ac(v: &mut Vcsp, c: ConstraintId, var: VarId, value: usize, q: &mut PropagationQueue) -> Result<bool> {
    let pos = locate(v, c, var, value)?;
    let s = *v.structure();
    let beta = v.constraint(c).row_min(&s, pos, value)?;
    let old = v.unary_cost(var, value);
    let new = s.combine(old, beta)?;
    if new <= old {
        return Ok(false);
    }
    v.set_unary_cost(var, value, new)?;
    q.push(QueueEntry {
        tuple: vec![value],
        scope: EntryScope::Unary(var),
        recorded: new,
    });
    v.constraint_mut(c).project_out(&s, pos, value, beta)?;
    Ok(true)
}

/// ExtAC: raises each c_P(t, a) to (c_P(t,a) ⊕ β) ⊖ β, where β combines the
/// unary costs along the tuple. Only absorbing valuations are ever written.
pub fn ext_ac(v: &mut Vcsp, var: VarId, value: usize, c: ConstraintId, q: &mut PropagationQueue) -> Result<bool> {
    let pos = locate(v, c, var, value)?;
    let s = *v.structure();
    let scope = v.constraint(c).scope().to_vec();
    let sizes = v.constraint(c).sizes().to_vec();
    let mut changed = false;
    for t in tuples_with(&sizes, pos, value) {
        let beta = s.sum(scope.iter().zip(&t).map(|(&j, &b)| v.unary_cost(j, b)));
        let current = v.cost(c, &t)?;
        let gamma = s.difference(s.combine(current, beta)?, beta)?;
        if gamma > current {
            assert!(s.is_absorbing(gamma), "extension wrote non-absorbing {gamma}");
            v.constraint_mut(c).set(&s, &t, gamma)?;
            q.push(QueueEntry {
                tuple: t,
                scope: EntryScope::Constraint(c),
                recorded: gamma,
            });
            changed = true;
        }
    }
    Ok(changed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GacOptions {
    /// Skip queue entries whose recorded cost is no longer current.
    pub stale_guard: bool,
}

impl Default for GacOptions {
    fn default() -> Self {
        GacOptions { stale_guard: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GacStats {
    /// While-loop iterations of the propagation phase.
    pub iterations: u64,
    pub proj_calls: u64,
    pub ext_calls: u64,
    pub pushes: u64,
    pub stale_skips: u64,
    /// erd + (r+1)·ed^r(2ed^r+2)
    pub iteration_bound: u128,
}

/// Upper bound on propagation iterations for a problem of this shape.
pub fn iteration_bound(v: &Vcsp) -> u128 {
    let (e, d, r) = (v.e() as u128, v.d() as u128, v.r() as u128);
    let edr = e.saturating_mul(d.saturating_pow(r as u32));
    let n2 = edr.saturating_mul(edr.saturating_mul(2).saturating_add(2));
    e.saturating_mul(r)
        .saturating_mul(d)
        .saturating_add((r + 1).saturating_mul(n2))
}

fn require_fair(s: &Structure) -> Result<()> {
    if s.is_fair() {
        Ok(())
    } else {
        Err(Error::Unfair {
            structure: s.to_string(),
        })
    }
}

/// Enforces generalized arc consistency in place on dense tables.
///
/// Initialization visits variables in id order, values in domain order and
/// the constraints on each variable in scope order, applying ExtAC then
/// ProjAC; propagation then drains the FIFO queue.
pub fn enforce_gac(v: &mut Vcsp, options: GacOptions) -> Result<GacStats> {
    require_fair(v.structure())?;
    *v = v.materialized()?;
    let mut q = PropagationQueue::new();
    let mut stats = GacStats {
        iteration_bound: iteration_bound(v),
        ..GacStats::default()
    };
    let on: Vec<Vec<ConstraintId>> = v.var_ids().map(|i| v.constraints_on(i)).collect();

    for i in v.var_ids() {
        for a in 0..v.domain_size(i) {
            for &c in &on[i.0] {
                ext_ac(v, i, a, c, &mut q)?;
                proj_ac(v, c, i, a, &mut q)?;
                stats.ext_calls += 1;
                stats.proj_calls += 1;
            }
        }
    }

    while let Some(entry) = q.pop() {
        stats.iterations += 1;
        let current = match entry.scope {
            EntryScope::Unary(i) => v.unary_cost(i, entry.tuple[0]),
            EntryScope::Constraint(c) => v.cost(c, &entry.tuple)?,
        };
        if options.stale_guard && current != entry.recorded {
            stats.stale_skips += 1;
            continue;
        }
        match entry.scope {
            EntryScope::Unary(i) => {
                for &c in &on[i.0] {
                    ext_ac(v, i, entry.tuple[0], c, &mut q)?;
                    stats.ext_calls += 1;
                }
            }
            EntryScope::Constraint(c) => {
                let scope = v.constraint(c).scope().to_vec();
                for (&i, &a) in scope.iter().zip(&entry.tuple) {
                    proj_ac(v, c, i, a, &mut q)?;
                    stats.proj_calls += 1;
                }
            }
        }
    }
    stats.pushes = q.pushed();
    if options.stale_guard {
        assert!(
            stats.iterations as u128 <= stats.iteration_bound,
            "propagation exceeded its bound: {} > {}",
            stats.iterations,
            stats.iteration_bound
        );
    }
    Ok(stats)
}

/// The first failing condition found by a consistency check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// c_P(t) ≠ (c_P(t) ⊕ β) ⊖ β.
    Tuple { scope: Vec<usize>, tuple: Vec<usize> },
    /// c_i(a) ≠ min_t (c_i(a) ⊕ c_P(t, a)).
    Value { scope: Vec<usize>, var: usize, value: usize },
    /// A tuple holding a forbidden value is not itself forbidden.
    Forbidden { scope: Vec<usize>, tuple: Vec<usize> },
    /// An allowed value has no allowed support.
    Unsupported { scope: Vec<usize>, var: usize, value: usize },
    /// An allowed value has no support of cost ⊥.
    NoZeroSupport { scope: Vec<usize>, var: usize, value: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub holds: bool,
    pub witness: Option<Violation>,
}

impl Check {
    pub(crate) fn from_witness(witness: Option<Violation>) -> Self {
        Check {
            holds: witness.is_none(),
            witness,
        }
    }
}

fn ids(scope: &[VarId]) -> Vec<usize> {
    scope.iter().map(|v| v.0).collect()
}

/// Checks both conditions of generalized arc consistency over C⁺.
pub fn is_gac(v: &Vcsp) -> Result<Check> {
    require_fair(v.structure())?;
    let s = v.structure();
    for c in v.constraint_ids() {
        let k = v.constraint(c);
        for t in tuples(k.sizes()) {
            let beta = s.sum(k.scope().iter().zip(&t).map(|(&j, &b)| v.unary_cost(j, b)));
            let current = k.cost(s, &t)?;
            if s.difference(s.combine(current, beta)?, beta)? != current {
                return Ok(Check::from_witness(Some(Violation::Tuple {
                    scope: ids(k.scope()),
                    tuple: t,
                })));
            }
        }
    }
    for c in v.constraint_ids() {
        let k = v.constraint(c);
        for (pos, &i) in k.scope().iter().enumerate() {
            for a in 0..k.sizes()[pos] {
                let unary = v.unary_cost(i, a);
                let best = s.combine(unary, k.row_min(s, pos, a)?)?;
                if best != unary {
                    return Ok(Check::from_witness(Some(Violation::Value {
                        scope: ids(k.scope()),
                        var: i.0,
                        value: a,
                    })));
                }
            }
        }
    }
    Ok(Check::from_witness(None))
}

/// The characterization for strictly monotonic structures: the underlying
/// crisp problem is arc consistent (forbidden values forbid their tuples and
/// every allowed value has an allowed support), and every allowed value has
/// a support of cost ⊥ in each constraint.
pub fn is_gac_strict(v: &Vcsp) -> Result<Check> {
    let s = v.structure();
    if !s.is_strictly_monotonic() {
        return Err(Error::Capability(format!("{s} is not strictly monotonic")));
    }
    let top = s.top();
    let allowed = |j: VarId, b: usize| v.unary_cost(j, b) < top;
    for c in v.constraint_ids() {
        let k = v.constraint(c);
        for t in tuples(k.sizes()) {
            let holds_forbidden = k.scope().iter().zip(&t).any(|(&j, &b)| !allowed(j, b));
            if holds_forbidden && k.cost(s, &t)? != top {
                return Ok(Check::from_witness(Some(Violation::Forbidden {
                    scope: ids(k.scope()),
                    tuple: t,
                })));
            }
        }
        for (pos, &i) in k.scope().iter().enumerate() {
            for a in (0..k.sizes()[pos]).filter(|&a| allowed(i, a)) {
                let mut supported = false;
                for t in tuples_with(k.sizes(), pos, a) {
                    if k.cost(s, &t)? < top && k.scope().iter().zip(&t).all(|(&j, &b)| allowed(j, b)) {
                        supported = true;
                        break;
                    }
                }
                if !supported {
                    return Ok(Check::from_witness(Some(Violation::Unsupported {
                        scope: ids(k.scope()),
                        var: i.0,
                        value: a,
                    })));
                }
            }
        }
    }
    for c in v.constraint_ids() {
        let k = v.constraint(c);
        for (pos, &i) in k.scope().iter().enumerate() {
            for a in (0..k.sizes()[pos]).filter(|&a| allowed(i, a)) {
                if k.row_min(s, pos, a)? != s.bottom() {
                    return Ok(Check::from_witness(Some(Violation::NoZeroSupport {
                        scope: ids(k.scope()),
                        var: i.0,
                        value: a,
                    })));
                }
            }
        }
    }
    Ok(Check::from_witness(None))
}

/// The crisp problem allowing exactly the labellings of cost below ⊤, over
/// the two-level chain (0 allowed, 1 forbidden).
pub fn underlying_csp(v: &Vcsp) -> Result<Vcsp> {
    let s = v.structure();
    let crisp = Structure::OrderedMax { levels: 2 };
    let flag = |x: Valuation| Valuation::Level(u32::from(x == s.top()));
    let mut out = Vcsp::new(crisp);
    for (k, var) in v.variables().iter().enumerate() {
        let id = out.add_variable(var.name.clone(), var.domain.labels().iter().cloned())?;
        for a in 0..var.domain.len() {
            out.set_unary_cost(id, a, flag(v.unary_cost(VarId(k), a)))?;
        }
    }
    for c in v.constraint_ids() {
        let dense = v.constraint(c).to_dense(s)?;
        let table = dense.table().iter().map(|&x| flag(x)).collect();
        out.add_constraint(CostFunction::new(dense.scope().to_vec(), dense.sizes().to_vec(), table)?)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AcStats {
    /// Values newly forbidden by propagation.
    pub deleted: u64,
    /// Support checks performed.
    pub revisions: u64,
}

/// Enforces arc consistency on the underlying crisp problem with a
/// constraint worklist, then sets every deleted value, and every tuple
/// holding one, to ⊤.
pub fn enforce_ac_underlying(v: &mut Vcsp) -> Result<AcStats> {
    let s = *v.structure();
    let top = s.top();
    let mut alive: Vec<Vec<bool>> = v
        .var_ids()
        .map(|i| v.unary(i).iter().map(|&x| x < top).collect())
        .collect();
    let on: Vec<Vec<ConstraintId>> = v.var_ids().map(|i| v.constraints_on(i)).collect();
    let mut stats = AcStats::default();
    let mut queue: VecDeque<ConstraintId> = v.constraint_ids().collect();
    let mut queued: Vec<bool> = vec![true; v.e()];

    while let Some(c) = queue.pop_front() {
        queued[c.0] = false;
        let scope = v.constraint(c).scope().to_vec();
        let sizes = v.constraint(c).sizes().to_vec();
        for (pos, &i) in scope.iter().enumerate() {
            for a in 0..sizes[pos] {
                if !alive[i.0][a] {
                    continue;
                }
                stats.revisions += 1;
                let mut supported = false;
                for t in tuples_with(&sizes, pos, a) {
                    if scope.iter().zip(&t).all(|(&j, &b)| alive[j.0][b]) && v.cost(c, &t)? < top {
                        supported = true;
                        break;
                    }
                }
                if !supported {
                    alive[i.0][a] = false;
                    stats.deleted += 1;
                    for &other in &on[i.0] {
                        if !queued[other.0] {
                            queued[other.0] = true;
                            queue.push_back(other);
                        }
                    }
                }
            }
        }
    }

    for i in v.var_ids().collect::<Vec<_>>() {
        for a in 0..v.domain_size(i) {
            if !alive[i.0][a] {
                v.set_unary_cost(i, a, top)?;
            }
        }
    }
    for c in v.constraint_ids().collect::<Vec<_>>() {
        let scope = v.constraint(c).scope().to_vec();
        let sizes = v.constraint(c).sizes().to_vec();
        for t in tuples(&sizes) {
            if scope.iter().zip(&t).any(|(&j, &b)| !alive[j.0][b]) && v.cost(c, &t)? != top {
                v.constraint_mut(c).set(&s, &t, top)?;
            }
        }
    }
    Ok(stats)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SacStats {
    pub ac: AcStats,
    pub proj_calls: u64,
    /// Valuations held by Δ tables after the sweep.
    pub delta_storage: u64,
}

/// Arc consistency for strictly monotonic structures: crisp arc consistency
/// on the underlying problem, then one projection per (constraint, variable,
/// value). The result keeps its constraints in Δ form.
pub fn enforce_sac_strict(v: &mut Vcsp) -> Result<SacStats> {
    let s = *v.structure();
    if !s.is_strictly_monotonic() {
        return Err(Error::Capability(format!("{s} is not strictly monotonic")));
    }
    let ac = enforce_ac_underlying(v)?;
    *v = v.to_delta()?;
    let mut stats = SacStats {
        ac,
        ..SacStats::default()
    };
    for c in v.constraint_ids().collect::<Vec<_>>() {
        let scope = v.constraint(c).scope().to_vec();
        for &i in &scope {
            for a in 0..v.domain_size(i) {
                proj(v, c, i, a)?;
                stats.proj_calls += 1;
            }
        }
    }
    stats.delta_storage = v
        .constraints()
        .iter()
        .map(|k| match k {
            crate::model::Constraint::Delta(d) => d.storage_len() as u64,
            crate::model::Constraint::Dense(_) => 0,
        })
        .sum();
    Ok(stats)
}

/// A GAC fixpoint reached during closure enumeration.
#[derive(Clone, Debug)]
pub struct Closure {
    pub problem: Vcsp,
    pub f_min: Valuation,
    /// Shortest operation sequence found that reaches it.
    pub moves: Vec<Move>,
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub closures: Vec<Closure>,
    pub min_f_min: Option<Valuation>,
    pub max_f_min: Option<Valuation>,
    /// False when some state at the depth limit still had applicable moves.
    pub complete: bool,
    pub states: u64,
}

fn state_key(v: &Vcsp) -> Result<(Vec<Vec<Valuation>>, Vec<Vec<Valuation>>)> {
    let unary = v.var_ids().map(|i| v.unary(i).to_vec()).collect();
    let tables = v
        .constraints()
        .iter()
        .map(|c| Ok(c.to_dense(v.structure())?.table().to_vec()))
        .collect::<Result<_>>()?;
    Ok((unary, tables))
}

/// Arc-consistency operations that would change `v`, in scan order.
fn effective_moves(v: &Vcsp) -> Result<Vec<(Move, Vcsp)>> {
    let mut out = Vec::new();
    for c in v.constraint_ids() {
        let scope = v.constraint(c).scope().to_vec();
        for &i in &scope {
            for a in 0..v.domain_size(i) {
                let mut q = PropagationQueue::new();
                let mut next = v.clone();
                if ext_ac(&mut next, i, a, c, &mut q)? {
                    out.push((
                        Move::Ext {
                            var: i,
                            value: a,
                            scope: scope.clone(),
                        },
                        next,
                    ));
                }
                let mut next = v.clone();
                if proj_ac(&mut next, c, i, a, &mut q)? {
                    out.push((
                        Move::Proj {
                            scope: scope.clone(),
                            var: i,
                            value: a,
                        },
                        next,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Breadth-first search over sequences of at most `op_budget` ProjAC/ExtAC
/// applications, collecting every distinct fixpoint.
pub fn enumerate_closures(v: &Vcsp, op_budget: usize) -> Result<ClosureReport> {
    require_fair(v.structure())?;
    let start = v.materialized()?;
    let mut seen: HashSet<(Vec<Vec<Valuation>>, Vec<Vec<Valuation>>)> = HashSet::new();
    seen.insert(state_key(&start)?);
    let mut frontier: VecDeque<(Vcsp, Vec<Move>)> = VecDeque::from([(start, Vec::new())]);
    let mut closures = Vec::new();
    let mut complete = true;
    let mut states = 0u64;

    while let Some((state, moves)) = frontier.pop_front() {
        states += 1;
        let successors = effective_moves(&state)?;
        if successors.is_empty() {
            debug_assert!(is_gac(&state)?.holds);
            let f_min = state.f_min()?;
            closures.push(Closure {
                problem: state,
                f_min,
                moves,
            });
            continue;
        }
        if moves.len() >= op_budget {
            complete = false;
            continue;
        }
        for (m, next) in successors {
            if seen.insert(state_key(&next)?) {
                let mut path = moves.clone();
                path.push(m);
                frontier.push_back((next, path));
            }
        }
    }

    let values: BTreeSet<Valuation> = closures.iter().map(|c| c.f_min).collect();
    Ok(ClosureReport {
        min_f_min: values.first().copied(),
        max_f_min: values.last().copied(),
        closures,
        complete,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn fig1d() -> Vcsp {
        let mut p = fig1a();
        p.set_unary_cost(VarId(0), 1, w(1)).unwrap();
        p.set_unary_cost(VarId(1), 0, INF).unwrap();
        let c = ConstraintId(0);
        p.constraint_mut(c).set(&Structure::Weighted, &[1, 1], w(0)).unwrap();
        p
    }

    #[test]
    fn proj_ac_records_unary_increase() {
        let mut p = fig1a();
        let mut q = PropagationQueue::new();
        assert!(proj_ac(&mut p, ConstraintId(0), VarId(0), 1, &mut q).unwrap());
        let entry = q.pop().unwrap();
        assert_eq!(entry.scope, EntryScope::Unary(VarId(0)));
        assert_eq!((entry.tuple, entry.recorded), (vec![1], w(1)));
        assert!(!proj_ac(&mut p, ConstraintId(0), VarId(0), 0, &mut q).unwrap());
        assert!(q.is_empty());
    }

    #[test]
    fn proj_ac_guard_ignores_infinite_unary() {
        let mut p = fig1a();
        p.set_unary_cost(VarId(0), 1, INF).unwrap();
        let before = p.clone();
        let mut q = PropagationQueue::new();
        assert!(!proj_ac(&mut p, ConstraintId(0), VarId(0), 1, &mut q).unwrap());
        assert_eq!(p, before);
    }

    #[test]
    fn ext_ac_only_propagates_top_in_weighted() {
        let mut p = fig1a();
        p.set_unary_cost(VarId(0), 0, w(3)).unwrap();
        let before = p.clone();
        let mut q = PropagationQueue::new();
        assert!(!ext_ac(&mut p, VarId(0), 0, ConstraintId(0), &mut q).unwrap());
        assert_eq!(p, before);
        p.set_unary_cost(VarId(1), 1, INF).unwrap();
        assert!(ext_ac(&mut p, VarId(1), 1, ConstraintId(0), &mut q).unwrap());
        assert_eq!(p.cost(ConstraintId(0), &[0, 1]).unwrap(), INF);
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn gac_on_fig1a_reaches_the_preferred_closure() {
        let mut p = fig1a();
        let stats = enforce_gac(&mut p, GacOptions::default()).unwrap();
        assert_eq!(p, fig1d());
        assert!(is_gac(&p).unwrap().holds);
        assert!(p.equivalent(&fig1a()).unwrap());
        assert!(stats.iterations as u128 <= stats.iteration_bound);
    }

    #[test]
    fn gac_check_witness_on_fig1a() {
        let check = is_gac(&fig1a()).unwrap();
        assert!(!check.holds);
        assert_eq!(
            check.witness,
            Some(Violation::Value {
                scope: vec![0, 1],
                var: 0,
                value: 1
            })
        );
    }

    #[test]
    fn gac_fixpoint_is_stable() {
        let mut p = fig1d();
        enforce_gac(&mut p, GacOptions::default()).unwrap();
        assert_eq!(p, fig1d());
    }

    #[test]
    fn strict_path_matches_queue_path_on_fig1a() {
        let mut strict = fig1a();
        let stats = enforce_sac_strict(&mut strict).unwrap();
        assert_eq!(strict, fig1d());
        assert_eq!(stats.proj_calls, 4);
        assert_eq!(stats.delta_storage, 8);
        assert!(is_gac_strict(&strict).unwrap().holds);
    }

    #[test]
    fn strict_path_rejects_other_structures() {
        let p = Vcsp::new(Structure::DrivingPenalty { max_years: 10 });
        assert!(matches!(enforce_sac_strict(&mut p.clone()), Err(Error::Capability(_))));
        assert!(is_gac_strict(&p).is_err());
    }

    #[test]
    fn underlying_csp_forbids_top_tuples() {
        let crisp = underlying_csp(&fig1a()).unwrap();
        let table = crisp.constraint(ConstraintId(0)).to_dense(crisp.structure()).unwrap();
        let allowed: Vec<bool> = table.table().iter().map(|&x| x == Valuation::Level(0)).collect();
        assert_eq!(allowed, vec![false, true, false, true]);
    }

    #[test]
    fn crisp_ac_forbids_unsupported_value() {
        let mut p = fig1a();
        let stats = enforce_ac_underlying(&mut p).unwrap();
        assert_eq!(stats.deleted, 1);
        assert_eq!(p.unary_cost(VarId(1), 0), INF);
        assert!(p.equivalent(&fig1a()).unwrap());
    }

    #[test]
    fn closures_of_a_gac_problem() {
        let report = enumerate_closures(&fig1d(), 4).unwrap();
        assert_eq!(report.closures.len(), 1);
        assert!(report.complete);
        assert_eq!(report.closures[0].problem, fig1d());
    }

    #[test]
    fn iteration_bound_formula() {
        let p = fig1a();
        // e=1, r=2, d=2: 4 + 3·4·10
        assert_eq!(iteration_bound(&p), 4 + 3 * 4 * 10);
    }
}
