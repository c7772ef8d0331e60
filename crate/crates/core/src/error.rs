use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("valuation {value} is not an element of {structure}")]
    ForeignValuation { structure: String, value: String },

    #[error("structure mismatch: {left} vs {right}")]
    StructureMismatch { left: String, right: String },

    #[error("difference {minuend} ⊖ {subtrahend} requested with subtrahend above minuend")]
    OrderViolation { minuend: String, subtrahend: String },

    #[error("{structure} has no difference {minuend} ⊖ {subtrahend}")]
    NoDifference {
        structure: String,
        minuend: String,
        subtrahend: String,
    },

    #[error("{structure} is not fair")]
    Unfair { structure: String },

    #[error("valuation overflow in {structure}")]
    Overflow { structure: String },

    #[error("invalid structure parameters: {0}")]
    InvalidStructure(String),

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("variable {0} does not exist")]
    UnknownVariable(String),

    #[error("value {value} is not in the domain of variable {variable}")]
    ValueOutOfDomain { variable: String, value: String },

    #[error("invalid domain for variable {variable}: {reason}")]
    InvalidDomain { variable: String, reason: String },

    #[error("duplicate variable name {0}")]
    DuplicateVariable(String),

    #[error("a constraint over scope {0} already exists")]
    DuplicateScope(String),

    #[error("invalid scope {scope}: {reason}")]
    InvalidScope { scope: String, reason: String },

    #[error("no constraint over scope {0}")]
    UnknownConstraint(String),

    #[error("table for scope {scope} has {found} entries, expected {expected}")]
    ArityMismatch {
        scope: String,
        expected: usize,
        found: usize,
    },

    #[error("{what} needs {needed} entries, above the cap of {cap}")]
    SizeCap { what: String, needed: u128, cap: u128 },

    #[error("problems differ in {0}")]
    SignatureMismatch(String),

    #[error("constraint graph is not a tree: {0}")]
    NotATree(String),

    #[error("invalid variable order: {0}")]
    InvalidOrder(String),

    #[error("delta tables are inconsistent for scope {0}")]
    CorruptDelta(String),

    #[error("{location}: {message}")]
    Parse { location: String, message: String },
}
