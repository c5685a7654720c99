use alloc::vec::Vec;

use crate::iterate::Sequence;
use crate::system::GridClass;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector must have at least one entry")]
    Empty,
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("entry {index} is not strictly positive ({value})")]
    NonPositive { index: usize, value: f64 },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("minor index set must be nonempty and strictly increasing")]
    InvalidIndexSet,
    #[error("dimension {n} exceeds the limit {limit} for this operation")]
    TooLarge { n: usize, limit: usize },
    #[error("coupling matrix entry ({row}, {col}) is negative ({value})")]
    NegativeCoupling { row: usize, col: usize, value: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is ill-conditioned (1-norm condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("system is not antitone ({class:?}); offending entries: {offending:?}")]
    NotAntitone { class: GridClass, offending: Vec<(usize, usize, f64)> },
    #[error("offset k is not strictly positive (entry {index} = {value})")]
    NonPositiveOffset { index: usize, value: f64 },
    #[error("iteration did not converge within {budget} steps")]
    BudgetExhausted { budget: usize },
    #[error("fixed-point iteration left the positive orthant at step {step}")]
    LeftDomain { step: usize },
    #[error("iteration ended in a cycle of period {period}")]
    Cycled { period: usize },
    #[error("{sequence:?} bracketing sequence is not monotone at step {step} (excess {excess:e})")]
    MonotonicityViolation { sequence: Sequence, step: usize, excess: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
