//! Projection and extension, the two basic equivalence-preserving arc
//! transformations, and the Δ⁺/Δ⁻ constraint representation.
//!
//! Both operations work in place on an exclusively held problem and
//! dispatch on the constraint's storage: dense tables are rewritten tuple by
//! tuple, Δ constraints only touch one correction entry.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{scope_name, ConstraintId, CostFunction, VarId, Vcsp};
use crate::valuation::{Structure, Valuation};

/// An original cost table plus, for each scope position, tables of what was
/// extended into (Δ⁺) and projected out of (Δ⁻) the constraint.
///
/// The effective cost of `t` is `c_or(t) ⊕ (⊕ Δ⁺) ⊖ (⊕ Δ⁻)`, combined in that
/// order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaConstraint {
    original: Arc<CostFunction>,
    plus: Vec<Vec<Valuation>>,
    minus: Vec<Vec<Valuation>>,
}

impl DeltaConstraint {
    pub fn new(original: Arc<CostFunction>, s: &Structure) -> Self {
        let fresh: Vec<Vec<Valuation>> = original.sizes().iter().map(|&d| vec![s.bottom(); d]).collect();
        DeltaConstraint {
            original,
            plus: fresh.clone(),
            minus: fresh,
        }
    }

    pub fn original(&self) -> &CostFunction {
        &self.original
    }

    pub fn delta_plus(&self, pos: usize) -> &[Valuation] {
        &self.plus[pos]
    }

    pub fn delta_minus(&self, pos: usize) -> &[Valuation] {
        &self.minus[pos]
    }

    /// Valuations held besides the shared original table: 2·Σ d_i.
    pub fn storage_len(&self) -> usize {
        self.plus.iter().chain(&self.minus).map(Vec::len).sum()
    }

    pub fn effective_cost(&self, s: &Structure, tuple: &[usize]) -> Result<Valuation> {
        let added = tuple
            .iter()
            .zip(&self.plus)
            .fold(self.original.get(tuple), |acc, (&a, table)| s.plus(acc, table[a]));
        let removed = s.sum(tuple.iter().zip(&self.minus).map(|(&a, table)| table[a]));
        if removed > added {
            return Err(Error::CorruptDelta(scope_name(self.original.scope())));
        }
        s.difference(added, removed)
            .map_err(|_| Error::CorruptDelta(scope_name(self.original.scope())))
    }

    pub(crate) fn add_plus(&mut self, s: &Structure, pos: usize, value: usize, alpha: Valuation) -> Result<()> {
        self.plus[pos][value] = s.combine(self.plus[pos][value], alpha)?;
        Ok(())
    }

    pub(crate) fn add_minus(&mut self, s: &Structure, pos: usize, value: usize, beta: Valuation) -> Result<()> {
        self.minus[pos][value] = s.combine(self.minus[pos][value], beta)?;
        Ok(())
    }

    pub fn materialize(&self, s: &Structure) -> Result<CostFunction> {
        let table = self
            .original
            .tuples()
            .map(|t| self.effective_cost(s, &t))
            .collect::<Result<Vec<_>>>()?;
        CostFunction::new(self.original.scope().to_vec(), self.original.sizes().to_vec(), table)
    }
}

/// Checks `var ∈ P` and `value ∈ d_var`; returns the scope position.
pub(crate) fn locate(v: &Vcsp, c: ConstraintId, var: VarId, value: usize) -> Result<usize> {
    if c.0 >= v.e() {
        return Err(Error::UnknownConstraint(format!("#{}", c.0)));
    }
    let constraint = v.constraint(c);
    let pos = constraint.position(var).ok_or_else(|| Error::InvalidScope {
        scope: v.scope_label(constraint.scope()),
        reason: format!("does not contain variable {}", var.0),
    })?;
    if value >= constraint.sizes()[pos] {
        return Err(Error::ValueOutOfDomain {
            variable: v.variable(var).name.clone(),
            value: value.to_string(),
        });
    }
    Ok(pos)
}

/// Proj(c_P, i, a): moves β = min_t c_P(t, a) onto c_i(a). Returns β.
pub fn proj(v: &mut Vcsp, c: ConstraintId, var: VarId, value: usize) -> Result<Valuation> {
    let pos = locate(v, c, var, value)?;
    let s = *v.structure();
    let beta = v.constraint(c).row_min(&s, pos, value)?;
    let unary = s.combine(v.unary_cost(var, value), beta)?;
    v.set_unary_cost(var, value, unary)?;
    v.constraint_mut(c).project_out(&s, pos, value, beta)?;
    Ok(beta)
}

/// Ext(i, a, c_P): moves α = c_i(a) into every c_P(t, a), leaving the
/// largest absorbing valuation below α on the unary cost. Returns α.
pub fn ext(v: &mut Vcsp, var: VarId, value: usize, c: ConstraintId) -> Result<Valuation> {
    let pos = locate(v, c, var, value)?;
    let s = *v.structure();
    let alpha = v.unary_cost(var, value);
    v.constraint_mut(c).extend_in(&s, pos, value, alpha)?;
    v.set_unary_cost(var, value, s.difference(alpha, alpha)?)?;
    Ok(alpha)
}

/// One recorded transformation, addressed by scope so it can be replayed on
/// another copy of a problem.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Move {
    Proj { scope: Vec<VarId>, var: VarId, value: usize },
    Ext { var: VarId, value: usize, scope: Vec<VarId> },
}

impl Move {
    pub fn apply(&self, v: &mut Vcsp) -> Result<Valuation> {
        let scope = match self {
            Move::Proj { scope, .. } | Move::Ext { scope, .. } => scope,
        };
        let c = v
            .constraint_id(scope)
            .ok_or_else(|| Error::UnknownConstraint(scope_name(scope)))?;
        match *self {
            Move::Proj { var, value, .. } => proj(v, c, var, value),
            Move::Ext { var, value, .. } => ext(v, var, value, c),
        }
    }

    /// Rendering with variable names and value labels.
    pub fn describe(&self, v: &Vcsp) -> String {
        let label = |var: VarId, value: usize| {
            let x = v.variable(var);
            format!("{},{}", x.name, x.domain.label(value))
        };
        match self {
            Move::Proj { scope, var, value } => {
                format!("proj(c{}, {})", v.scope_label(scope), label(*var, *value))
            }
            Move::Ext { var, value, scope } => {
                format!("ext({}, c{})", label(*var, *value), v.scope_label(scope))
            }
        }
    }
}
