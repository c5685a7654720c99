//! Dense real vectors under the componentwise partial order.
//!
//! `x ≤ y` holds when `xᵢ ≤ yᵢ` for every `i`. Two vectors may be
//! incomparable, so [`compare`] returns a [`Relation`] instead of an
//! [`Ordering`](core::cmp::Ordering).

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Deref, Index};

use crate::{Error, Result};

/// Absolute per-component tolerance used by [`compare`].
pub const EQ_TOL: f64 = 1e-9;

/// Entries of a [`PositiveVector`] must exceed this floor.
pub const POSITIVE_FLOOR: f64 = 1e-300;

#[derive(Clone, PartialEq)]
pub struct OrderedVector(Vec<f64>);

impl OrderedVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn filled(n: usize, value: f64) -> Result<Self> {
        Self::new(alloc::vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `max |xᵢ|`.
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn norm2(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum())
    }

    /// `‖self − other‖∞`; panics on length mismatch.
    pub fn dist_inf(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&v| v > POSITIVE_FLOOR)
    }
}

impl Deref for OrderedVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for OrderedVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for OrderedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// A vector whose entries are all strictly positive (above [`POSITIVE_FLOOR`]).
#[derive(Clone, PartialEq)]
pub struct PositiveVector(OrderedVector);

impl PositiveVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::try_from(OrderedVector::new(entries)?)
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn as_ordered(&self) -> &OrderedVector {
        &self.0
    }

    pub fn into_ordered(self) -> OrderedVector {
        self.0
    }
}

impl TryFrom<OrderedVector> for PositiveVector {
    type Error = Error;

    fn try_from(v: OrderedVector) -> Result<Self> {
        if let Some(index) = v.iter().position(|&x| x <= POSITIVE_FLOOR) {
            return Err(Error::NonPositive { index, value: v[index] });
        }
        Ok(Self(v))
    }
}

impl From<PositiveVector> for OrderedVector {
    fn from(p: PositiveVector) -> Self {
        p.0
    }
}

impl Deref for PositiveVector {
    type Target = OrderedVector;

    fn deref(&self) -> &OrderedVector {
        &self.0
    }
}

impl fmt::Debug for PositiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Outcome of a componentwise comparison `a ? b`.
///
/// The variants partition all pairs: `Lneq` means every component of `a` is
/// strictly below `b`, `Leq` means `a ≤ b` with at least one tie but not all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Leq,
    Lneq,
    Geq,
    Gneq,
    Incomparable,
}

impl Relation {
    /// `a ≤ b` in the partial order (ties allowed).
    pub fn is_le(self) -> bool {
        matches!(self, Relation::Eq | Relation::Leq | Relation::Lneq)
    }

    pub fn is_ge(self) -> bool {
        matches!(self, Relation::Eq | Relation::Geq | Relation::Gneq)
    }

    pub fn reverse(self) -> Self {
        match self {
            Relation::Leq => Relation::Geq,
            Relation::Lneq => Relation::Gneq,
            Relation::Geq => Relation::Leq,
            Relation::Gneq => Relation::Lneq,
            other => other,
        }
    }
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(())
}

/// Componentwise comparison with tolerance [`EQ_TOL`].
pub fn compare(a: &OrderedVector, b: &OrderedVector) -> Result<Relation> {
    compare_with_tol(a, b, EQ_TOL)
}

/// Componentwise comparison; components within `tol` of each other are ties.
/// `tol = 0` gives the exact relation.
pub fn compare_with_tol(a: &[f64], b: &[f64], tol: f64) -> Result<Relation> {
    check_len(a, b)?;
    let (mut below, mut above, mut ties) = (0usize, 0usize, 0usize);
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        if d.abs() <= tol {
            ties += 1;
        } else if d < 0.0 {
            below += 1;
        } else {
            above += 1;
        }
    }
    Ok(match (below, above) {
        (0, 0) => Relation::Eq,
        (_, 0) if ties == 0 => Relation::Lneq,
        (_, 0) => Relation::Leq,
        (0, _) if ties == 0 => Relation::Gneq,
        (0, _) => Relation::Geq,
        _ => Relation::Incomparable,
    })
}

/// Componentwise (Hadamard/Schur) product.
pub fn hadamard(a: &OrderedVector, b: &OrderedVector) -> Result<OrderedVector> {
    check_len(a, b)?;
    Ok(OrderedVector(a.iter().zip(b.iter()).map(|(x, y)| x * y).collect()))
}

/// Componentwise reciprocal `1/y`.
pub fn reciprocal(y: &PositiveVector) -> PositiveVector {
    // 1/y of an entry in (1e-300, f64::MAX] stays finite and positive.
    PositiveVector(OrderedVector(y.iter().map(|v| 1.0 / v).collect()))
}

/// Lexicographic total order, used to make reported point sets deterministic.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}
