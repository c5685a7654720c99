//! Fixed-point iteration `y_{r+1} = S(y_r)`, cycle detection and the
//! monotone bracketing sequences of `S∘S`.

use alloc::vec::Vec;

use crate::system::{fixed_point_tol, AntitoneMap, ElectricSystem};
use crate::vecorder::{lex_cmp, OrderedVector, PositiveVector, EQ_TOL};
use crate::{Error, Result};

pub const CYCLE_TOL: f64 = 1e-8;
pub const TYPE_TOL: f64 = 1e-8;
pub const CYCLE_WINDOW: usize = 64;
pub const DEFAULT_BUDGET: usize = 10_000;

/// A lag-`p` match is only a cycle when it is this much tighter than the
/// spacing of the points inside the candidate cycle. Slowly contracting
/// oscillations otherwise pass for 2-cycles.
const CYCLE_SEPARATION: f64 = 1e-6;

/// `τ_conv = 1e-12 · (1 + ‖y‖∞)`
pub fn convergence_tol(y: &[f64]) -> f64 {
    1e-12 * (1.0 + y.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Converged { limit: OrderedVector },
    /// Cycle points in lexicographic order.
    Cycle { period: usize, points: Vec<OrderedVector> },
    /// Iterate number `step` had an entry that was not strictly positive.
    DivergedFromDomain { step: usize },
    BudgetExhausted,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Converged { .. } => "CONVERGED",
            Verdict::Cycle { .. } => "CYCLE",
            Verdict::DivergedFromDomain { .. } => "DIVERGED-FROM-DOMAIN",
            Verdict::BudgetExhausted => "BUDGET-EXHAUSTED",
        }
    }

    pub fn limit(&self) -> Option<&OrderedVector> {
        match self {
            Verdict::Converged { limit } => Some(limit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub start: PositiveVector,
    /// `iterates[0]` is the start.
    pub iterates: Vec<OrderedVector>,
    pub verdict: Verdict,
    pub iterations: usize,
}

impl IterationTrace {
    pub fn last(&self) -> &OrderedVector {
        self.iterates.last().expect("trace holds the start")
    }
}

/// Runs `y_{r+1} = S(y_r)` from `y0` for at most `budget` evaluations.
pub fn fit<M: AntitoneMap + ?Sized>(map: &M, y0: &PositiveVector, budget: usize) -> Result<IterationTrace> {
    check_dim(map.dim(), y0)?;
    fit_with(|y| map.apply(y), y0, budget)
}

/// [`fit`] for an arbitrary step function, e.g. `S∘S`.
pub fn fit_with<F>(mut step: F, y0: &PositiveVector, budget: usize) -> Result<IterationTrace>
where
    F: FnMut(&PositiveVector) -> OrderedVector,
{
    if budget == 0 {
        return Err(Error::InvalidArgument("iteration budget must be at least 1"));
    }
    let mut iterates = Vec::with_capacity(budget.min(1024) + 1);
    iterates.push(y0.as_ordered().clone());
    let mut current = y0.clone();
    for r in 1..=budget {
        let next = step(&current);
        if next.len() != current.len() {
            return Err(Error::DimensionMismatch { expected: current.len(), found: next.len() });
        }
        let done = |verdict, iterates| Ok(IterationTrace { start: y0.clone(), iterates, verdict, iterations: r });
        let Ok(positive) = PositiveVector::try_from(next.clone()) else {
            iterates.push(next);
            return done(Verdict::DivergedFromDomain { step: r }, iterates);
        };
        if next.dist_inf(current.as_ordered()) <= convergence_tol(&next) {
            iterates.push(next.clone());
            return done(Verdict::Converged { limit: next }, iterates);
        }
        iterates.push(next);
        if let Some(period) = detect_cycle(&iterates) {
            let mut points: Vec<OrderedVector> = iterates[iterates.len() - period..].to_vec();
            points.sort_by(|a, b| lex_cmp(a, b));
            return done(Verdict::Cycle { period, points }, iterates);
        }
        current = positive;
    }
    Ok(IterationTrace { start: y0.clone(), iterates, verdict: Verdict::BudgetExhausted, iterations: budget })
}

fn detect_cycle(iterates: &[OrderedVector]) -> Option<usize> {
    let last = iterates.len() - 1;
    let newest = &iterates[last];
    for period in 2..=CYCLE_WINDOW.min(last) {
        let lag = newest.dist_inf(&iterates[last - period]);
        if lag > CYCLE_TOL {
            continue;
        }
        let window = &iterates[last + 1 - period..=last];
        let spacing = window
            .iter()
            .enumerate()
            .flat_map(|(i, a)| window[i + 1..].iter().map(move |b| a.dist_inf(b)))
            .fold(f64::INFINITY, f64::min);
        if lag <= CYCLE_SEPARATION * spacing {
            return Some(period);
        }
    }
    None
}

fn check_dim(n: usize, y: &[f64]) -> Result<()> {
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    Ok(())
}

/// `S(S(y))`. When `S(y)` leaves the positive orthant the intermediate value
/// is returned, so the caller sees the domain exit.
pub fn apply_twice<M: AntitoneMap + ?Sized>(map: &M, y: &PositiveVector) -> OrderedVector {
    let once = map.apply(y);
    match PositiveVector::try_from(once.clone()) {
        Ok(p) => map.apply(&p),
        Err(_) => once,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sequence {
    /// `Fit_{S∘S}(k)`, nondecreasing
    Lower,
    /// `Fit_{S∘S}(S(k))`, nonincreasing
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeVerdict {
    TypeI,
    TypeII,
    Undecided,
}

impl TypeVerdict {
    pub fn label(self) -> &'static str {
        match self {
            TypeVerdict::TypeI => "TYPE-I",
            TypeVerdict::TypeII => "TYPE-II",
            TypeVerdict::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketReport {
    pub lower: OrderedVector,
    pub upper: OrderedVector,
    pub verdict: TypeVerdict,
    /// `‖upper − lower‖∞`
    pub gap: f64,
    pub lower_trace: IterationTrace,
    pub upper_trace: IterationTrace,
}

impl BracketReport {
    /// Whether `y` lies in `[lower − τ_eq, upper + τ_eq]`.
    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter().zip(self.lower.iter().zip(self.upper.iter())).all(|(v, (lo, hi))| *v >= lo - EQ_TOL && *v <= hi + EQ_TOL)
    }
}

/// Runs `Fit_{S∘S}` from the lower bound `k` and from `S(k)`.
///
/// `k` must bound `S` from below on the positive orthant; for an
/// [`ElectricSystem`] with positive offset use [`bracket_system`].
pub fn bracket<M: AntitoneMap + ?Sized>(map: &M, k: &PositiveVector, budget: usize) -> Result<BracketReport> {
    check_dim(map.dim(), k)?;
    let sk = PositiveVector::try_from(map.apply(k)).map_err(|_| Error::LeftDomain { step: 1 })?;
    let lower_trace = fit_with(|y| apply_twice(map, y), k, budget)?;
    check_monotone(&lower_trace, Sequence::Lower)?;
    let upper_trace = fit_with(|y| apply_twice(map, y), &sk, budget)?;
    check_monotone(&upper_trace, Sequence::Upper)?;

    let lower = lower_trace.last().clone();
    let upper = upper_trace.last().clone();
    if let Some(excess) = lower.iter().zip(upper.iter()).map(|(l, u)| l - u).find(|d| *d > EQ_TOL) {
        return Err(Error::MonotonicityViolation { sequence: Sequence::Upper, step: upper_trace.iterations, excess });
    }
    let gap = lower.dist_inf(&upper);
    let both_converged = matches!(lower_trace.verdict, Verdict::Converged { .. }) && matches!(upper_trace.verdict, Verdict::Converged { .. });
    let verdict = if !both_converged {
        TypeVerdict::Undecided
    } else if gap <= TYPE_TOL {
        TypeVerdict::TypeI
    } else if gap > 10.0 * TYPE_TOL {
        TypeVerdict::TypeII
    } else {
        TypeVerdict::Undecided
    };
    Ok(BracketReport { lower, upper, verdict, gap, lower_trace, upper_trace })
}

/// [`bracket`] with `k` taken from the system, which must be strictly positive.
pub fn bracket_system(sys: &ElectricSystem, budget: usize) -> Result<BracketReport> {
    let k = positive_offset(sys)?;
    bracket(sys, &k, budget)
}

pub(crate) fn positive_offset(sys: &ElectricSystem) -> Result<PositiveVector> {
    if let Some((index, &value)) = sys.k().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveOffset { index, value });
    }
    PositiveVector::try_from(sys.k().clone()).map_err(|_| Error::NonPositiveOffset { index: 0, value: sys.k().min_entry() })
}

fn check_monotone(trace: &IterationTrace, sequence: Sequence) -> Result<()> {
    for (step, w) in trace.iterates.windows(2).enumerate() {
        let (prev, next) = match sequence {
            Sequence::Lower => (&w[0], &w[1]),
            Sequence::Upper => (&w[1], &w[0]),
        };
        let excess = prev.iter().zip(next.iter()).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        if excess > EQ_TOL {
            return Err(Error::MonotonicityViolation { sequence, step: step + 1, excess });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Fixed,
    OrderTwo,
    Neither,
}

/// Classifies `y` as a fixed point, an element of order two, or neither.
pub fn order_two_check<M: AntitoneMap + ?Sized>(map: &M, y: &PositiveVector) -> Result<PointKind> {
    check_dim(map.dim(), y)?;
    let tol = fixed_point_tol(y);
    let once = map.apply(y);
    if once.dist_inf(y.as_ordered()) <= tol {
        return Ok(PointKind::Fixed);
    }
    let Ok(p) = PositiveVector::try_from(once) else {
        return Ok(PointKind::Neither);
    };
    if map.apply(&p).dist_inf(y.as_ordered()) <= tol {
        Ok(PointKind::OrderTwo)
    } else {
        Ok(PointKind::Neither)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSample {
    /// Limit and cycle points, deduplicated within `τ_cycle`, in lexicographic order.
    pub points: Vec<OrderedVector>,
    /// Starts whose iteration neither converged nor cycled.
    pub unresolved: usize,
}

impl OmegaSample {
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        self.points.iter().any(|p| p.iter().zip(y).all(|(a, b)| (a - b).abs() <= tol))
    }
}

/// Union of limit and cycle points of `Fit_S` over `starts`.
pub fn omega_sample<M: AntitoneMap + ?Sized>(map: &M, starts: &[PositiveVector], budget: usize) -> Result<OmegaSample> {
    omega_with(starts, budget, map.dim(), |y| map.apply(y))
}

/// Same as [`omega_sample`] for `Fit_{S∘S}`.
pub fn omega_sample_twice<M: AntitoneMap + ?Sized>(map: &M, starts: &[PositiveVector], budget: usize) -> Result<OmegaSample> {
    omega_with(starts, budget, map.dim(), |y| apply_twice(map, y))
}

fn omega_with<F>(starts: &[PositiveVector], budget: usize, n: usize, mut step: F) -> Result<OmegaSample>
where
    F: FnMut(&PositiveVector) -> OrderedVector,
{
    if starts.is_empty() {
        return Err(Error::Empty);
    }
    let mut found = Vec::new();
    let mut unresolved = 0;
    for s in starts {
        check_dim(n, s)?;
        match fit_with(&mut step, s, budget)?.verdict {
            Verdict::Converged { limit } => found.push(limit),
            Verdict::Cycle { points, .. } => found.extend(points),
            _ => unresolved += 1,
        }
    }
    found.sort_by(|a, b| lex_cmp(a, b));
    let mut points: Vec<OrderedVector> = Vec::new();
    for p in found {
        if !points.iter().any(|q| q.dist_inf(&p) <= CYCLE_TOL) {
            points.push(p);
        }
    }
    Ok(OmegaSample { points, unresolved })
}
