//! The VCSP data model: variables, domains, cost tables and problems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::transforms::DeltaConstraint;
use crate::valuation::{Structure, Valuation};

/// Largest dense table we are willing to allocate.
pub const TABLE_CAP: u128 = 1_000_000;

/// Default bound on the number of complete assignments an enumeration visits.
pub const ASSIGNMENT_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId(pub usize);

/// A partial or complete assignment: variable ↦ domain index.
pub type Assignment = BTreeMap<VarId, usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    labels: Vec<String>,
}

impl Domain {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidDomain {
                variable: String::new(),
                reason: "empty domain".into(),
            });
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidDomain {
                variable: String::new(),
                reason: "repeated label".into(),
            });
        }
        Ok(Domain { labels })
    }

    /// Domain with labels `0..size`.
    pub fn range(size: usize) -> Result<Self> {
        Domain::new((0..size).map(|k| k.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

/// Row-major enumeration of ℓ(P): the last position varies fastest.
#[derive(Clone, Debug)]
pub struct Tuples {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Tuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.sizes[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

pub fn tuples(sizes: &[usize]) -> Tuples {
    let next = if sizes.iter().any(|&s| s == 0) {
        None
    } else {
        Some(vec![0; sizes.len()])
    };
    Tuples {
        sizes: sizes.to_vec(),
        next,
    }
}

/// Tuples of ℓ(P) whose position `pos` holds `value`, in row-major order.
pub fn tuples_with(sizes: &[usize], pos: usize, value: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut rest = sizes.to_vec();
    rest.remove(pos);
    tuples(&rest).map(move |mut t| {
        t.insert(pos, value);
        t
    })
}

fn product(sizes: impl IntoIterator<Item = usize>) -> u128 {
    sizes
        .into_iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s as u128))
}

/// A dense cost table over an ordered scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostFunction {
    scope: Vec<VarId>,
    sizes: Vec<usize>,
    table: Vec<Valuation>,
}

impl CostFunction {
    pub fn new(scope: Vec<VarId>, sizes: Vec<usize>, table: Vec<Valuation>) -> Result<Self> {
        let name = scope_name(&scope);
        if scope.is_empty() {
            return Err(Error::InvalidScope {
                scope: name,
                reason: "empty scope".into(),
            });
        }
        if scope.len() != sizes.len() {
            return Err(Error::InvalidScope {
                scope: name,
                reason: "one domain size per scope variable".into(),
            });
        }
        if scope.iter().collect::<BTreeSet<_>>().len() != scope.len() {
            return Err(Error::InvalidScope {
                scope: name,
                reason: "repeated variable".into(),
            });
        }
        let needed = product(sizes.iter().copied());
        if needed > TABLE_CAP {
            return Err(Error::SizeCap {
                what: format!("table over {name}"),
                needed,
                cap: TABLE_CAP,
            });
        }
        if table.len() as u128 != needed {
            return Err(Error::ArityMismatch {
                scope: name,
                expected: needed as usize,
                found: table.len(),
            });
        }
        Ok(CostFunction { scope, sizes, table })
    }

    pub fn filled(scope: Vec<VarId>, sizes: Vec<usize>, value: Valuation) -> Result<Self> {
        let needed = product(sizes.iter().copied());
        if needed > TABLE_CAP {
            return Err(Error::SizeCap {
                what: format!("table over {}", scope_name(&scope)),
                needed,
                cap: TABLE_CAP,
            });
        }
        CostFunction::new(scope, sizes, vec![value; needed as usize])
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn table(&self) -> &[Valuation] {
        &self.table
    }

    pub fn position(&self, var: VarId) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.sizes.len());
        tuple
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&value, &size)| acc * size + value)
    }

    pub fn get(&self, tuple: &[usize]) -> Valuation {
        self.table[self.index(tuple)]
    }

    pub fn set(&mut self, tuple: &[usize], value: Valuation) {
        let k = self.index(tuple);
        self.table[k] = value;
    }

    pub fn tuples(&self) -> Tuples {
        tuples(&self.sizes)
    }

    /// Smallest entry, first in row-major order.
    pub fn min(&self) -> Valuation {
        *self.table.iter().min().expect("tables are never empty")
    }
}

pub(crate) fn scope_name(scope: &[VarId]) -> String {
    let names: Vec<String> = scope.iter().map(|v| v.0.to_string()).collect();
    format!("({})", names.join(","))
}

/// A non-unary constraint, stored either densely or as an original table
/// plus Δ⁺/Δ⁻ corrections.
#[derive(Clone, Debug)]
pub enum Constraint {
    Dense(CostFunction),
    Delta(DeltaConstraint),
}

impl Constraint {
    pub fn scope(&self) -> &[VarId] {
        match self {
            Constraint::Dense(c) => c.scope(),
            Constraint::Delta(c) => c.original().scope(),
        }
    }

    pub fn sizes(&self) -> &[usize] {
        match self {
            Constraint::Dense(c) => c.sizes(),
            Constraint::Delta(c) => c.original().sizes(),
        }
    }

    pub fn arity(&self) -> usize {
        self.scope().len()
    }

    pub fn position(&self, var: VarId) -> Option<usize> {
        self.scope().iter().position(|&v| v == var)
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Constraint::Delta(_))
    }

    /// Current (effective) cost of a tuple.
    pub fn cost(&self, s: &Structure, tuple: &[usize]) -> Result<Valuation> {
        match self {
            Constraint::Dense(c) => Ok(c.get(tuple)),
            Constraint::Delta(c) => c.effective_cost(s, tuple),
        }
    }

    /// First minimum of the row where position `pos` is `value`.
    pub fn row_min(&self, s: &Structure, pos: usize, value: usize) -> Result<Valuation> {
        let mut best: Option<Valuation> = None;
        for t in tuples_with(self.sizes(), pos, value) {
            let c = self.cost(s, &t)?;
            if best.map_or(true, |b| c < b) {
                best = Some(c);
            }
        }
        Ok(best.expect("rows are never empty"))
    }

    pub fn min(&self, s: &Structure) -> Result<Valuation> {
        match self {
            Constraint::Dense(c) => Ok(c.min()),
            Constraint::Delta(_) => {
                let mut best: Option<Valuation> = None;
                for t in tuples(self.sizes()) {
                    let c = self.cost(s, &t)?;
                    if best.map_or(true, |b| c < b) {
                        best = Some(c);
                    }
                }
                Ok(best.expect("tables are never empty"))
            }
        }
    }

    /// Subtracts `beta` from every tuple whose position `pos` is `value`.
    pub(crate) fn project_out(&mut self, s: &Structure, pos: usize, value: usize, beta: Valuation) -> Result<()> {
        match self {
            Constraint::Dense(c) => {
                let rows: Vec<Vec<usize>> = tuples_with(c.sizes(), pos, value).collect();
                for t in rows {
                    let v = s.difference(c.get(&t), beta)?;
                    c.set(&t, v);
                }
                Ok(())
            }
            Constraint::Delta(c) => c.add_minus(s, pos, value, beta),
        }
    }

    /// Combines `alpha` into every tuple whose position `pos` is `value`.
    pub(crate) fn extend_in(&mut self, s: &Structure, pos: usize, value: usize, alpha: Valuation) -> Result<()> {
        match self {
            Constraint::Dense(c) => {
                let rows: Vec<Vec<usize>> = tuples_with(c.sizes(), pos, value).collect();
                for t in rows {
                    let v = s.combine(c.get(&t), alpha)?;
                    c.set(&t, v);
                }
                Ok(())
            }
            Constraint::Delta(c) => c.add_plus(s, pos, value, alpha),
        }
    }

    /// Overwrites one tuple, materializing a Δ constraint first.
    pub(crate) fn set(&mut self, s: &Structure, tuple: &[usize], value: Valuation) -> Result<()> {
        if let Constraint::Delta(c) = self {
            *self = Constraint::Dense(c.materialize(s)?);
        }
        match self {
            Constraint::Dense(c) => c.set(tuple, value),
            Constraint::Delta(_) => unreachable!(),
        }
        Ok(())
    }

    pub fn to_dense(&self, s: &Structure) -> Result<CostFunction> {
        match self {
            Constraint::Dense(c) => Ok(c.clone()),
            Constraint::Delta(c) => c.materialize(s),
        }
    }
}

/// A valued CSP ⟨X, D, C, S⟩.
///
/// Every variable carries a unary table (⊥ unless set). Non-unary
/// constraints are kept sorted by scope, at most one per variable set;
/// a [`ConstraintId`] is the position in that order and stays valid until
/// the next [`Vcsp::add_constraint`].
#[derive(Clone, Debug)]
pub struct Vcsp {
    structure: Structure,
    variables: Vec<Variable>,
    unary: Vec<Vec<Valuation>>,
    constraints: Vec<Constraint>,
}

impl Vcsp {
    pub fn new(structure: Structure) -> Self {
        Vcsp {
            structure,
            variables: Vec::new(),
            unary: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_variable<S: Into<String>>(&mut self, name: impl Into<String>, labels: impl IntoIterator<Item = S>) -> Result<VarId> {
        let name = name.into();
        if self.variables.iter().any(|v| v.name == name) {
            return Err(Error::DuplicateVariable(name));
        }
        let domain = Domain::new(labels).map_err(|e| match e {
            Error::InvalidDomain { reason, .. } => Error::InvalidDomain {
                variable: name.clone(),
                reason,
            },
            other => other,
        })?;
        let id = VarId(self.variables.len());
        self.unary.push(vec![self.structure.bottom(); domain.len()]);
        self.variables.push(Variable { name, domain });
        Ok(id)
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    /// Number of non-unary constraints.
    pub fn e(&self) -> usize {
        self.constraints.len()
    }

    /// Largest domain size.
    pub fn d(&self) -> usize {
        self.variables.iter().map(|v| v.domain.len()).max().unwrap_or(0)
    }

    /// Largest constraint arity (1 when there are no non-unary constraints).
    pub fn r(&self) -> usize {
        self.constraints.iter().map(Constraint::arity).max().unwrap_or(1)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.variables[var.0]
    }

    pub fn domain_size(&self, var: VarId) -> usize {
        self.variables[var.0].domain.len()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    fn check_var(&self, var: VarId) -> Result<()> {
        if var.0 < self.variables.len() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(var.to_string()))
        }
    }

    fn check_value(&self, var: VarId, value: usize) -> Result<()> {
        self.check_var(var)?;
        if value < self.domain_size(var) {
            Ok(())
        } else {
            Err(Error::ValueOutOfDomain {
                variable: self.variables[var.0].name.clone(),
                value: value.to_string(),
            })
        }
    }

    pub fn unary(&self, var: VarId) -> &[Valuation] {
        &self.unary[var.0]
    }

    pub fn unary_cost(&self, var: VarId, value: usize) -> Valuation {
        self.unary[var.0][value]
    }

    pub fn set_unary_cost(&mut self, var: VarId, value: usize, cost: Valuation) -> Result<()> {
        self.check_value(var, value)?;
        self.structure.check(cost)?;
        self.unary[var.0][value] = cost;
        Ok(())
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, id: ConstraintId) -> &Constraint {
        &self.constraints[id.0]
    }

    pub(crate) fn constraint_mut(&mut self, id: ConstraintId) -> &mut Constraint {
        &mut self.constraints[id.0]
    }

    pub fn constraint_ids(&self) -> impl Iterator<Item = ConstraintId> {
        (0..self.constraints.len()).map(ConstraintId)
    }

    /// Constraints whose scope contains `var`, in scope order.
    pub fn constraints_on(&self, var: VarId) -> Vec<ConstraintId> {
        self.constraint_ids()
            .filter(|&c| self.constraints[c.0].scope().contains(&var))
            .collect()
    }

    /// The constraint over exactly this set of variables.
    pub fn constraint_id(&self, vars: &[VarId]) -> Option<ConstraintId> {
        let key: BTreeSet<VarId> = vars.iter().copied().collect();
        self.constraints
            .iter()
            .position(|c| c.scope().iter().copied().collect::<BTreeSet<_>>() == key)
            .map(ConstraintId)
    }

    /// Adds a non-unary constraint; unary tables go through
    /// [`Vcsp::set_unary_cost`]. Ids of constraints sorting after the new
    /// scope shift by one.
    pub fn add_constraint(&mut self, c: CostFunction) -> Result<ConstraintId> {
        let name = scope_name(c.scope());
        if c.arity() < 2 {
            return Err(Error::InvalidScope {
                scope: name,
                reason: "unary costs belong in the variable's unary table".into(),
            });
        }
        for (&var, &size) in c.scope().iter().zip(c.sizes()) {
            self.check_var(var)?;
            if self.domain_size(var) != size {
                return Err(Error::InvalidScope {
                    scope: name,
                    reason: format!("size {size} does not match the domain of {}", self.variables[var.0].name),
                });
            }
        }
        if let Some(&bad) = c.table().iter().find(|&&v| !self.structure.contains(v)) {
            self.structure.check(bad)?;
        }
        if self.constraint_id(c.scope()).is_some() {
            return Err(Error::DuplicateScope(self.scope_label(c.scope())));
        }
        let at = self.constraints.partition_point(|k| k.scope() < c.scope());
        self.constraints.insert(at, Constraint::Dense(c));
        Ok(ConstraintId(at))
    }

    /// Human-readable scope using variable names.
    pub fn scope_label(&self, scope: &[VarId]) -> String {
        let names: Vec<&str> = scope
            .iter()
            .map(|v| self.variables.get(v.0).map_or("?", |x| x.name.as_str()))
            .collect();
        format!("({})", names.join(","))
    }

    pub fn cost(&self, id: ConstraintId, tuple: &[usize]) -> Result<Valuation> {
        self.constraints[id.0].cost(&self.structure, tuple)
    }

    /// Copy with every constraint in Δ form.
    pub fn to_delta(&self) -> Result<Vcsp> {
        let mut out = self.clone();
        for c in &mut out.constraints {
            if let Constraint::Dense(dense) = c {
                *c = Constraint::Delta(DeltaConstraint::new(Arc::new(dense.clone()), &self.structure));
            }
        }
        Ok(out)
    }

    /// Copy with every constraint dense.
    pub fn materialized(&self) -> Result<Vcsp> {
        let mut out = self.clone();
        for c in &mut out.constraints {
            if c.is_delta() {
                *c = Constraint::Dense(c.to_dense(&self.structure)?);
            }
        }
        Ok(out)
    }

    /// V(t): combination over unary tables of assigned variables and every
    /// constraint whose scope is covered by `t`.
    pub fn valuation_of(&self, t: &Assignment) -> Result<Valuation> {
        for (&var, &value) in t {
            self.check_value(var, value)?;
        }
        let s = &self.structure;
        let mut total = s.bottom();
        for (&var, &value) in t {
            total = s.combine(total, self.unary[var.0][value])?;
        }
        for c in &self.constraints {
            let tuple: Option<Vec<usize>> = c.scope().iter().map(|v| t.get(v).copied()).collect();
            if let Some(tuple) = tuple {
                total = s.combine(total, c.cost(s, &tuple)?)?;
            }
        }
        Ok(total)
    }

    /// Valuation of a complete assignment given as one value per variable.
    pub fn complete_valuation(&self, values: &[usize]) -> Result<Valuation> {
        let t: Assignment = values.iter().enumerate().map(|(k, &v)| (VarId(k), v)).collect();
        if t.len() != self.n() {
            return Err(Error::InvalidScope {
                scope: format!("{} values", values.len()),
                reason: format!("expected {} values", self.n()),
            });
        }
        self.valuation_of(&t)
    }

    /// Sub-problem on `vars`: those variables (renumbered in ascending id
    /// order, names kept), their unary tables, and constraints inside them.
    pub fn subproblem(&self, vars: &[VarId]) -> Result<Vcsp> {
        for &v in vars {
            self.check_var(v)?;
        }
        let keep: BTreeSet<VarId> = vars.iter().copied().collect();
        let renumber: BTreeMap<VarId, VarId> = keep.iter().enumerate().map(|(k, &v)| (v, VarId(k))).collect();
        let mut out = Vcsp::new(self.structure);
        for &v in &keep {
            let var = &self.variables[v.0];
            out.add_variable(var.name.clone(), var.domain.labels().iter().cloned())?;
            out.unary[renumber[&v].0] = self.unary[v.0].clone();
        }
        for c in &self.constraints {
            if c.scope().iter().all(|v| keep.contains(v)) {
                let dense = c.to_dense(&self.structure)?;
                let scope = dense.scope().iter().map(|v| renumber[v]).collect();
                out.add_constraint(CostFunction::new(scope, dense.sizes().to_vec(), dense.table().to_vec())?)?;
            }
        }
        Ok(out)
    }

    /// f_min: combination of every table's minimum, unary tables included.
    pub fn f_min(&self) -> Result<Valuation> {
        let s = &self.structure;
        let mut total = s.bottom();
        for table in &self.unary {
            let m = *table.iter().min().expect("domains are never empty");
            total = s.combine(total, m)?;
        }
        for c in &self.constraints {
            total = s.combine(total, c.min(s)?)?;
        }
        Ok(total)
    }

    /// Number of complete assignments.
    pub fn search_space(&self) -> u128 {
        product(self.variables.iter().map(|v| v.domain.len()))
    }

    /// Same structure, variable names and domains.
    pub fn check_signature(&self, other: &Vcsp) -> Result<()> {
        if self.structure != other.structure {
            return Err(Error::SignatureMismatch(format!(
                "structure ({} vs {})",
                self.structure, other.structure
            )));
        }
        if self.variables != other.variables {
            return Err(Error::SignatureMismatch("variables or domains".into()));
        }
        Ok(())
    }

    /// Whether both problems give every complete assignment the same valuation.
    pub fn equivalent(&self, other: &Vcsp) -> Result<bool> {
        self.equivalent_capped(other, ASSIGNMENT_CAP)
    }

    pub fn equivalent_capped(&self, other: &Vcsp, cap: u128) -> Result<bool> {
        self.check_signature(other)?;
        let needed = self.search_space();
        if needed > cap {
            return Err(Error::SizeCap {
                what: "equivalence check".into(),
                needed,
                cap,
            });
        }
        let sizes: Vec<usize> = self.variables.iter().map(|v| v.domain.len()).collect();
        for t in tuples(&sizes) {
            if self.complete_valuation(&t)? != other.complete_valuation(&t)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Problems are equal when they have the same signature, unary tables and
/// effective constraint costs, whatever the storage.
impl PartialEq for Vcsp {
    fn eq(&self, other: &Self) -> bool {
        if self.structure != other.structure
            || self.variables != other.variables
            || self.unary != other.unary
            || self.constraints.len() != other.constraints.len()
        {
            return false;
        }
        self.constraints.iter().zip(&other.constraints).all(|(a, b)| {
            match (a.to_dense(&self.structure), b.to_dense(&other.structure)) {
                (Ok(x), Ok(y)) => x == y,
                _ => false,
            }
        })
    }
}

/// Restriction of `t` to `vars`.
pub fn project_assignment(t: &Assignment, vars: &[VarId]) -> Result<Assignment> {
    vars.iter()
        .map(|v| match t.get(v) {
            Some(&value) => Ok((*v, value)),
            None => Err(Error::UnknownVariable(format!("{v} is not assigned"))),
        })
        .collect()
}
