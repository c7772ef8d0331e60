//! Soft arc consistency for valued constraint satisfaction problems.

pub mod cli;
pub mod dac;
pub mod error;
pub mod gac;
pub mod model;
pub mod oracle;
pub mod random;
pub mod transforms;
pub mod valuation;

pub use error::{Error, Result};
pub use model::{Assignment, ConstraintId, CostFunction, Domain, VarId, Variable, Vcsp};
pub use valuation::{Structure, Valuation};
