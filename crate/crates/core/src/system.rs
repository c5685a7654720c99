//! The antitone system `S(y) = k + M(1/y)` with nonnegative coupling `M`.

use alloc::vec::Vec;

use crate::linalg::{condition_number_1, Lu, SquareMatrix};
use crate::vecorder::{OrderedVector, PositiveVector};
use crate::{Error, Result};

/// Coupling entries below `-NEG_TOL` are rejected as negative.
pub const NEG_TOL: f64 = 1e-12;
/// Largest accepted 1-norm condition number of `Y_LL` at ingestion.
pub const MAX_CONDITION: f64 = 1e12;

/// Residual threshold `τ_fix = 1e-10 · (1 + ‖y‖∞)` for declaring a fixed point.
pub fn fixed_point_tol(y: &[f64]) -> f64 {
    1e-10 * (1.0 + y.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
}

/// A continuous antitone map on the positive orthant.
///
/// Implementations only evaluate; Jacobians live on [`ElectricSystem`].
pub trait AntitoneMap {
    fn dim(&self) -> usize;

    /// `S(y)`. Callers guarantee `y.len() == self.dim()`.
    fn apply(&self, y: &PositiveVector) -> OrderedVector;
}

impl<T: AntitoneMap + ?Sized> AntitoneMap for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, y: &PositiveVector) -> OrderedVector {
        (**self).apply(y)
    }
}

/// The pair `(k, M)` defining `S_{k,M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectricSystem {
    k: OrderedVector,
    m: SquareMatrix,
}

impl ElectricSystem {
    pub fn new(k: OrderedVector, m: SquareMatrix) -> Result<Self> {
        if k.len() != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: k.len() });
        }
        let n = m.dim();
        for row in 0..n {
            for col in 0..n {
                let value = m.get(row, col);
                if value < -NEG_TOL {
                    return Err(Error::NegativeCoupling { row, col, value });
                }
            }
        }
        Ok(Self { k, m })
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &OrderedVector {
        &self.k
    }

    pub fn m(&self) -> &SquareMatrix {
        &self.m
    }

    /// Same offset, coupling entry `(i, j)` replaced.
    pub fn with_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        let n = self.dim();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { index: i.max(j), n });
        }
        let mut m = self.m.clone();
        m.set(i, j, value);
        Self::new(self.k.clone(), m)
    }

    fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: y.len() });
        }
        Ok(())
    }

    fn eval_unchecked(&self, y: &[f64]) -> Vec<f64> {
        self.m
            .rows()
            .zip(self.k.iter())
            .map(|(row, k)| k + row.iter().zip(y).map(|(m, y)| m / y).sum::<f64>())
            .collect()
    }

    fn psi_unchecked(&self, y: &[f64]) -> Vec<f64> {
        self.eval_unchecked(y).iter().zip(y).map(|(s, y)| y - s).collect()
    }

    /// `S(y) = k + M·(1/y)`.
    pub fn eval_s(&self, y: &PositiveVector) -> Result<OrderedVector> {
        self.check(y)?;
        OrderedVector::new(self.eval_unchecked(y))
    }

    /// `J_S(y) = −M·diag(1/(y∘y))`.
    pub fn jacobian_s(&self, y: &PositiveVector) -> Result<SquareMatrix> {
        self.check(y)?;
        Ok(self.m.map(|_, j, m| -m / (y[j] * y[j])))
    }

    /// `Ψ(y) = y − S(y)`.
    pub fn residual_psi(&self, y: &PositiveVector) -> Result<OrderedVector> {
        self.check(y)?;
        OrderedVector::new(self.psi_unchecked(y))
    }

    /// `J_Ψ(y) = I + M·diag(1/(y∘y))`.
    pub fn jacobian_psi(&self, y: &PositiveVector) -> Result<SquareMatrix> {
        self.check(y)?;
        Ok(self.m.map(|i, j, m| if i == j { 1.0 } else { 0.0 } + m / (y[j] * y[j])))
    }

    /// `‖Ψ(y)‖∞` on a raw slice; `None` unless every entry is positive.
    pub(crate) fn residual_inf(&self, y: &[f64]) -> Option<f64> {
        if y.len() != self.dim() || y.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return None;
        }
        let r = self.psi_unchecked(y);
        r.iter().all(|v| v.is_finite()).then(|| r.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
    }

    pub(crate) fn psi_raw(&self, y: &[f64]) -> Vec<f64> {
        self.psi_unchecked(y)
    }

    pub(crate) fn jacobian_psi_raw(&self, y: &[f64]) -> SquareMatrix {
        self.m.map(|i, j, m| if i == j { 1.0 } else { 0.0 } + m / (y[j] * y[j]))
    }

    /// Whether every offset entry is strictly positive.
    pub fn has_positive_offset(&self) -> bool {
        self.k.iter().all(|&v| v > 0.0)
    }
}

impl AntitoneMap for ElectricSystem {
    fn dim(&self) -> usize {
        self.k.len()
    }

    fn apply(&self, y: &PositiveVector) -> OrderedVector {
        OrderedVector::new(self.eval_unchecked(y)).unwrap_or_else(|_| {
            // non-finite output only arises from overflow; saturate so the
            // iteration engine reports a domain exit rather than panicking
            OrderedVector::new(self.eval_unchecked(y).into_iter().map(|v| if v.is_finite() { v } else { f64::MAX }).collect())
                .expect("finite after saturation")
        })
    }
}

/// Sign pattern of `M̃ = Y_LL⁻¹·diag(P_c)` after grid reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridClass {
    /// `M = −M̃ ≥ 0`
    Antitone,
    /// `M̃ ≥ 0`
    Isotone,
    Mixed,
}

/// DC grid data: load-block admittance, open-circuit voltages and constant power demands.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub y_ll: SquareMatrix,
    pub v_star: PositiveVector,
    pub p_c: OrderedVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReduction {
    /// `M̃ = Y_LL⁻¹·diag(P_c)`
    pub m_tilde: SquareMatrix,
    pub class: GridClass,
    pub condition: f64,
}

/// Reduces `diag(V)·Y_LL·(V − V*) + P_c = 0` to `V = V* + M̃·(1/V)` form and
/// classifies the sign pattern of `M̃`.
pub fn reduce_grid(g: &GridSpec) -> Result<GridReduction> {
    let n = g.y_ll.dim();
    for len in [g.v_star.len(), g.p_c.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let lu = Lu::new(&g.y_ll);
    if lu.is_singular() {
        return Err(Error::Singular);
    }
    let condition = condition_number_1(&g.y_ll);
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let inv = lu.inverse().ok_or(Error::Singular)?;
    let m_tilde = inv.map(|_, j, v| v * g.p_c[j]);
    let entries = m_tilde.as_slice();
    let class = if entries.iter().all(|&v| -v >= -NEG_TOL) {
        GridClass::Antitone
    } else if entries.iter().all(|&v| v >= -NEG_TOL) {
        GridClass::Isotone
    } else {
        GridClass::Mixed
    };
    Ok(GridReduction { m_tilde, class, condition })
}

/// Builds `(k, M) = (V*, −M̃)`; rejects isotone and mixed systems with the
/// entries of `M` that are negative.
pub fn ingest_grid(g: &GridSpec) -> Result<ElectricSystem> {
    let red = reduce_grid(g)?;
    let m = red.m_tilde.map(|_, _, v| -v);
    if red.class != GridClass::Antitone {
        let n = m.dim();
        let offending = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| m.get(i, j) < -NEG_TOL)
            .map(|(i, j)| (i, j, m.get(i, j)))
            .collect();
        return Err(Error::NotAntitone { class: red.class, offending });
    }
    // clear round-off negatives inside the tolerance band
    let m = m.map(|_, _, v| v.max(0.0));
    ElectricSystem::new(g.v_star.as_ordered().clone(), m)
}

/// `S(y) = 3 − y` on `(0, 2)`, `1` on `[2, ∞)`. Every point of `[1, 2]`
/// is a fixed point of `S∘S`; `1.5` is the only fixed point of `S`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarReflection;

fn reflect(y: f64) -> f64 {
    if y < 2.0 {
        3.0 - y
    } else {
        1.0
    }
}

impl AntitoneMap for ScalarReflection {
    fn dim(&self) -> usize {
        1
    }

    fn apply(&self, y: &PositiveVector) -> OrderedVector {
        OrderedVector::new(alloc::vec![reflect(y[0])]).expect("finite")
    }
}

/// Two-dimensional version with crossed arguments:
/// `S₁(y) = r(y₂)`, `S₂(y) = r(y₁)` with `r` as in [`ScalarReflection`].
/// Its fixed points form the segment `y₁ + y₂ = 3` inside `[1, 2]²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrossedReflection;

impl AntitoneMap for CrossedReflection {
    fn dim(&self) -> usize {
        2
    }

    fn apply(&self, y: &PositiveVector) -> OrderedVector {
        OrderedVector::new(alloc::vec![reflect(y[1]), reflect(y[0])]).expect("finite")
    }
}

/// Piecewise-linear nonincreasing function given by knots, extended
/// constantly outside the knot range.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    knots: Vec<(f64, f64)>,
}

impl Tabulated {
    /// Knots must have strictly increasing abscissae and nonincreasing values.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Empty);
        }
        if knots.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidArgument("tabulated knots must be finite"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument("tabulated abscissae must increase"));
        }
        if knots.windows(2).any(|w| w[1].1 > w[0].1) {
            return Err(Error::InvalidArgument("tabulated values must not increase (antitone)"));
        }
        Ok(Self { knots })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if x <= first.0 {
            return first.1;
        }
        if x >= last.0 {
            return last.1;
        }
        let i = self.knots.partition_point(|k| k.0 <= x);
        let (x0, y0) = self.knots[i - 1];
        let (x1, y1) = self.knots[i];
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    }
}

/// User-tabulated separable map `Sᵢ(y) = cᵢ + Σⱼ fᵢⱼ(yⱼ)` with each `fᵢⱼ`
/// nonincreasing, hence antitone.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedMap {
    offset: Vec<f64>,
    terms: Vec<Vec<Option<Tabulated>>>,
}

impl TabulatedMap {
    pub fn new(offset: Vec<f64>, terms: Vec<Vec<Option<Tabulated>>>) -> Result<Self> {
        let n = offset.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if let Some(row) = terms.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        if terms.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: terms.len() });
        }
        Ok(Self { offset, terms })
    }
}

impl AntitoneMap for TabulatedMap {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn apply(&self, y: &PositiveVector) -> OrderedVector {
        let out = self
            .offset
            .iter()
            .zip(&self.terms)
            .map(|(c, row)| c + row.iter().zip(y.iter()).filter_map(|(f, &yj)| f.as_ref().map(|f| f.eval(yj))).sum::<f64>())
            .collect();
        OrderedVector::new(out).expect("finite knots give finite values")
    }
}
