//! Exact integer sets and relations over affine constraints.
//!
//! Emptiness and projection are decided over the integers (an Omega-test style
//! solver in [`omega`]); rational Fourier–Motzkin is only used where it is
//! known to be exact.

mod affine;
mod display;
mod omega;
mod rel;
mod set;

pub use affine::{AffineExpr, Constraint, ConstraintKind};
pub use rel::IntRel;
pub use set::{IntSet, ParamBox};

/// Variables per piece (dims + params + locals) before giving up.
pub const MAX_VARS: usize = 12;
/// Constraints per piece before giving up.
pub const MAX_CONSTRAINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntSetError {
    #[error("dimension limit exceeded: more than {limit} {what}")]
    DimensionLimit { what: &'static str, limit: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("set is unbounded")]
    Unbounded,
}
