//! Fixed points of `S_{k,M}`: direct iteration for positive offsets,
//! matrix-class certificates, multistart Newton enumeration, descent search
//! and parameter sweeps.

use alloc::vec;
use alloc::vec::Vec;

use crate::iterate::{bracket_system, fit, positive_offset, TypeVerdict, Verdict};
use crate::linalg::{Lu, SquareMatrix};
use crate::matclass::{is_p0_matrix, MatrixClassCertificate, MAX_EXHAUSTIVE_DIM};
use crate::system::{fixed_point_tol, ElectricSystem, NEG_TOL};
use crate::vecorder::{compare, lex_cmp, OrderedVector, PositiveVector, Relation};
use crate::{Error, Result};

/// Newton and descent iterates never go below this.
pub const LO_SAFETY: f64 = 1e-9;
/// Positive floor of the automatic search box.
pub const AUTO_BOX_FLOOR: f64 = 1e-6;
/// Largest dimension for which a tensor seed grid is built.
pub const MAX_GRID_DIM: usize = 6;
/// Transitions are bisected down to this width.
pub const TRANSITION_WIDTH: f64 = 1e-3;

/// `τ_dedup = 1e-6 · (1 + ‖y‖∞)`
pub fn dedup_tol(y: &[f64]) -> f64 {
    1e-6 * (1.0 + y.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// `k > 0`: exactly one fixed point, globally attractive.
    UniquePositiveK,
    /// `M` is P₀: at most one fixed point.
    AtMostOneP0,
    /// `M` is P₀ with positive diagonal: exactly one fixed point.
    ExistsP0PositiveDiag,
    None,
}

impl CertificateKind {
    pub fn label(self) -> &'static str {
        match self {
            CertificateKind::UniquePositiveK => "UNIQUE-POSITIVE-K",
            CertificateKind::AtMostOneP0 => "AT-MOST-ONE-P0",
            CertificateKind::ExistsP0PositiveDiag => "EXISTS-P0-POSITIVE-DIAG",
            CertificateKind::None => "NONE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    PositiveOffset,
    /// Smallest diagonal entry of `M`.
    PositiveDiagonal { min: f64 },
    /// Outcome of the P₀ test on `M`, positive or not.
    P0(MatrixClassCertificate),
    TooLarge { n: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub basis: Vec<Hypothesis>,
    pub reason: Option<&'static str>,
}

impl Certificate {
    /// Re-runs every check in the basis against `sys`.
    pub fn reverify(&self, sys: &ElectricSystem) -> bool {
        let basis_ok = self.basis.iter().all(|h| match h {
            Hypothesis::PositiveOffset => sys.has_positive_offset(),
            Hypothesis::PositiveDiagonal { min } => {
                let fresh = min_diagonal(sys.m());
                fresh > 0.0 && fresh == *min
            }
            Hypothesis::P0(cert) => cert.reverify(sys.m()),
            Hypothesis::TooLarge { n, limit } => *n == sys.dim() && n > limit,
        });
        basis_ok && certify(sys).kind == self.kind
    }
}

fn min_diagonal(m: &SquareMatrix) -> f64 {
    (0..m.dim()).map(|i| m.get(i, i)).fold(f64::INFINITY, f64::min)
}

/// Structural guarantee on the number of fixed points.
pub fn certify(sys: &ElectricSystem) -> Certificate {
    if sys.has_positive_offset() {
        return Certificate { kind: CertificateKind::UniquePositiveK, basis: vec![Hypothesis::PositiveOffset], reason: None };
    }
    let n = sys.dim();
    let p0 = match is_p0_matrix(sys.m()) {
        Ok(c) => c,
        Err(_) => {
            return Certificate {
                kind: CertificateKind::None,
                basis: vec![Hypothesis::TooLarge { n, limit: MAX_EXHAUSTIVE_DIM }],
                reason: Some("dimension too large for the exhaustive P0 test"),
            }
        }
    };
    if !p0.holds {
        return Certificate {
            kind: CertificateKind::None,
            basis: vec![Hypothesis::P0(p0)],
            reason: Some("M is not P0; no structural guarantee"),
        };
    }
    let min = min_diagonal(sys.m());
    if min > 0.0 {
        Certificate {
            kind: CertificateKind::ExistsP0PositiveDiag,
            basis: vec![Hypothesis::P0(p0), Hypothesis::PositiveDiagonal { min }],
            reason: None,
        }
    } else {
        Certificate {
            kind: CertificateKind::AtMostOneP0,
            basis: vec![Hypothesis::P0(p0)],
            reason: Some("zero diagonal entry; existence not guaranteed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootMethod {
    Iteration,
    Newton { seed: OrderedVector },
    Descent { start: OrderedVector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoundRoot {
    pub point: PositiveVector,
    /// `‖Ψ(point)‖∞`
    pub residual: f64,
    pub method: RootMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketSummary {
    pub lower: OrderedVector,
    pub upper: OrderedVector,
    pub verdict: TypeVerdict,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Deduplicated, in lexicographic order.
    pub roots: Vec<FoundRoot>,
    pub certificates: Vec<Certificate>,
    /// Pairs of reported roots that are comparable. Always empty for a
    /// sound run; kept so a violation is visible instead of hidden.
    pub comparable_pairs: Vec<(usize, usize)>,
    pub bracket: Option<BracketSummary>,
    pub seeds: usize,
}

impl SolveReport {
    pub fn points(&self) -> impl Iterator<Item = &PositiveVector> {
        self.roots.iter().map(|r| &r.point)
    }
}

fn residual_inf(sys: &ElectricSystem, y: &[f64]) -> f64 {
    sys.residual_inf(y).unwrap_or(f64::INFINITY)
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// The unique fixed point for `k > 0`, by `Fit_S(k)` followed by a Newton
/// polish and a bracketing cross-check.
pub fn solve_positive_k(sys: &ElectricSystem, budget: usize) -> Result<SolveReport> {
    let k = positive_offset(sys)?;
    let trace = fit(sys, &k, budget)?;
    let limit = match trace.verdict {
        Verdict::Converged { limit } => limit,
        Verdict::Cycle { period, .. } => return Err(Error::Cycled { period }),
        Verdict::DivergedFromDomain { step } => return Err(Error::LeftDomain { step }),
        Verdict::BudgetExhausted => return Err(Error::BudgetExhausted { budget }),
    };
    let point = polish(sys, limit.into_vec(), 3);
    let residual = residual_inf(sys, &point);
    let point = PositiveVector::new(point)?;
    let b = bracket_system(sys, budget)?;
    Ok(SolveReport {
        roots: vec![FoundRoot { point, residual, method: RootMethod::Iteration }],
        certificates: vec![certify(sys)],
        comparable_pairs: Vec::new(),
        bracket: Some(BracketSummary { lower: b.lower, upper: b.upper, verdict: b.verdict, gap: b.gap }),
        seeds: 1,
    })
}

/// Undamped Newton steps, each kept only if it lowers `‖Ψ‖∞`.
fn polish(sys: &ElectricSystem, mut y: Vec<f64>, steps: usize) -> Vec<f64> {
    let mut best = residual_inf(sys, &y);
    for _ in 0..steps {
        let r = sys.psi_raw(&y);
        let Some(d) = Lu::new(&sys.jacobian_psi_raw(&y)).solve(&r) else { break };
        let cand: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a - b).collect();
        let rc = residual_inf(sys, &cand);
        if rc < best && cand.iter().all(|v| *v >= LO_SAFETY) {
            y = cand;
            best = rc;
        } else {
            break;
        }
    }
    y
}

/// One Armijo-backtracked steepest-descent step on `½‖Ψ‖₂²`, staying at or
/// above `LO_SAFETY`.
fn descent_step(sys: &ElectricSystem, y: &[f64], r: &[f64], t0: f64) -> Option<(Vec<f64>, f64)> {
    let j = sys.jacobian_psi_raw(y);
    let g = j.transpose().mul_vec(r);
    let gg: f64 = g.iter().map(|v| v * v).sum();
    if !(gg > 0.0) || !gg.is_finite() {
        return None;
    }
    let f0: f64 = r.iter().map(|v| v * v).sum::<f64>() / 2.0;
    // largest step that keeps every entry ≥ LO_SAFETY
    let cap = y
        .iter()
        .zip(&g)
        .filter(|(_, gi)| **gi > 0.0)
        .map(|(yi, gi)| (yi - LO_SAFETY) / gi)
        .fold(f64::INFINITY, f64::min);
    let mut t = t0.min(cap);
    for _ in 0..60 {
        let cand: Vec<f64> = y.iter().zip(&g).map(|(a, b)| (a - t * b).max(LO_SAFETY)).collect();
        let rc = sys.psi_raw(&cand);
        let f: f64 = rc.iter().map(|v| v * v).sum::<f64>() / 2.0;
        if f.is_finite() && f <= f0 - 1e-4 * t * gg {
            return Some((cand, t));
        }
        t /= 2.0;
    }
    None
}

/// Damped Newton on `Ψ` from `seed`. Steps are halved until the iterate stays
/// at or above `LO_SAFETY` and `‖Ψ‖₂` decreases; a singular Jacobian or a
/// failed line search falls back to one descent step.
pub(crate) fn damped_newton(sys: &ElectricSystem, seed: &[f64], max_steps: usize) -> Option<Vec<f64>> {
    let mut y = seed.to_vec();
    let mut r = sys.psi_raw(&y);
    let mut nr = norm2(&r);
    let mut best = nr;
    let mut since_best = 0;
    for _ in 0..max_steps {
        if !nr.is_finite() {
            return None;
        }
        if r.iter().fold(0.0, |a: f64, v| a.max(v.abs())) <= fixed_point_tol(&y) {
            let y = polish(sys, y, 2);
            return (residual_inf(sys, &y) <= fixed_point_tol(&y)).then_some(y);
        }
        let newton = Lu::new(&sys.jacobian_psi_raw(&y)).solve(&r).and_then(|d| {
            let mut t = 1.0;
            for _ in 0..60 {
                let cand: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a - t * b).collect();
                if cand.iter().all(|v| *v >= LO_SAFETY) {
                    let rc = sys.psi_raw(&cand);
                    let nc = norm2(&rc);
                    if nc < nr {
                        return Some((cand, rc, nc));
                    }
                }
                t /= 2.0;
            }
            None
        });
        let (ny, nrv, nn) = match newton {
            Some(step) => step,
            None => {
                let (cand, _) = descent_step(sys, &y, &r, 1.0)?;
                let rc = sys.psi_raw(&cand);
                let nc = norm2(&rc);
                (cand, rc, nc)
            }
        };
        y = ny;
        r = nrv;
        nr = nn;
        // give up on seeds that creep toward a positive infimum
        if nr < best * (1.0 - 1e-3) {
            best = nr;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 50 {
                return None;
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchBox {
    /// `loᵢ = max(floor, kᵢ)`, `hiᵢ = max(kᵢ, floor) + Σⱼ Mᵢⱼ / floor`
    Auto { floor: f64 },
    Explicit { lo: PositiveVector, hi: PositiveVector },
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox::Auto { floor: AUTO_BOX_FLOOR }
    }
}

impl SearchBox {
    /// Concrete bounds for `sys`.
    pub fn bounds(&self, sys: &ElectricSystem) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = sys.dim();
        match self {
            SearchBox::Auto { floor } => {
                if !(*floor > 0.0) || !floor.is_finite() {
                    return Err(Error::InvalidArgument("box floor must be positive"));
                }
                let lo: Vec<f64> = sys.k().iter().map(|k| k.max(*floor)).collect();
                let hi = sys.m().rows().zip(&lo).map(|(row, l)| l + row.iter().sum::<f64>() / floor).collect();
                Ok((lo, hi))
            }
            SearchBox::Explicit { lo, hi } => {
                for v in [lo, hi] {
                    if v.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
                    }
                }
                if lo.iter().zip(hi.iter()).any(|(a, b)| a > b) {
                    return Err(Error::InvalidArgument("box lower corner exceeds upper corner"));
                }
                Ok((lo.to_vec(), hi.to_vec()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Seeding {
    /// `per_axis` geometrically spaced values per coordinate across the box.
    Grid { per_axis: usize },
    List(Vec<PositiveVector>),
}

impl Seeding {
    /// Grid size that keeps the seed count manageable for dimension `n`.
    pub fn default_for(n: usize) -> Self {
        let per_axis = match n {
            0..=2 => 24,
            3 => 12,
            4 => 6,
            _ => 4,
        };
        Seeding::Grid { per_axis }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerateOptions {
    pub search_box: SearchBox,
    pub seeding: Seeding,
    /// Newton steps per seed.
    pub max_steps: usize,
}

impl EnumerateOptions {
    pub fn for_dim(n: usize) -> Self {
        Self { search_box: SearchBox::default(), seeding: Seeding::default_for(n), max_steps: 200 }
    }
}

/// Geometric spacing of `count ≥ 2` points on `[lo, hi]`, `0 < lo`.
fn axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..count).map(|i| libm::exp(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
}

fn seed_points(sys: &ElectricSystem, opts: &EnumerateOptions) -> Result<Vec<Vec<f64>>> {
    let n = sys.dim();
    match &opts.seeding {
        Seeding::List(list) => {
            if let Some(bad) = list.iter().find(|s| s.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
            }
            Ok(list.iter().map(|s| s.to_vec()).collect())
        }
        Seeding::Grid { per_axis } => {
            if *per_axis < 2 {
                return Err(Error::InvalidArgument("seeds per axis must be at least 2"));
            }
            if n > MAX_GRID_DIM {
                return Err(Error::TooLarge { n, limit: MAX_GRID_DIM });
            }
            let (lo, hi) = opts.search_box.bounds(sys)?;
            let axes: Vec<Vec<f64>> = (0..n).map(|i| axis(lo[i], hi[i], *per_axis)).collect();
            let total: usize = axes.iter().map(Vec::len).product();
            let mut seeds = Vec::with_capacity(total);
            for mut idx in 0..total {
                let mut p = Vec::with_capacity(n);
                for a in &axes {
                    p.push(a[idx % a.len()]);
                    idx /= a.len();
                }
                seeds.push(p);
            }
            Ok(seeds)
        }
    }
}

/// Multistart damped Newton over a seed grid (or list). Roots are sorted,
/// deduplicated within `τ_dedup`, verified against `τ_fix` and checked for
/// pairwise incomparability.
pub fn enumerate_fixed_points(sys: &ElectricSystem, opts: &EnumerateOptions) -> Result<SolveReport> {
    let seeds = seed_points(sys, opts)?;
    let mut candidates: Vec<(Vec<f64>, f64, usize)> = seeds
        .iter()
        .enumerate()
        .filter_map(|(i, s)| damped_newton(sys, s, opts.max_steps).map(|y| (y, i)))
        .map(|(y, i)| {
            let r = residual_inf(sys, &y);
            (y, r, i)
        })
        .filter(|(y, r, _)| *r <= fixed_point_tol(y))
        .collect();
    candidates.sort_by(|a, b| lex_cmp(&a.0, &b.0).then(a.2.cmp(&b.2)));

    let mut kept: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    for c in candidates {
        match kept.iter_mut().find(|k| dist_inf(&k.0, &c.0) <= dedup_tol(&k.0)) {
            Some(k) if c.1 < k.1 => *k = c,
            Some(_) => {}
            None => kept.push(c),
        }
    }
    kept.sort_by(|a, b| lex_cmp(&a.0, &b.0));

    let roots = kept
        .into_iter()
        .map(|(y, residual, i)| {
            Ok(FoundRoot {
                point: PositiveVector::new(y)?,
                residual,
                method: RootMethod::Newton { seed: OrderedVector::new(seeds[i].clone())? },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let comparable_pairs = comparable_pairs(&roots)?;
    Ok(SolveReport { roots, certificates: vec![certify(sys)], comparable_pairs, bracket: None, seeds: seeds.len() })
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

fn comparable_pairs(roots: &[FoundRoot]) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if compare(&roots[i].point, &roots[j].point)? != Relation::Incomparable {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Positive offsets go through [`solve_positive_k`], everything else through
/// [`enumerate_fixed_points`].
pub fn solve(sys: &ElectricSystem, budget: usize, opts: &EnumerateOptions) -> Result<SolveReport> {
    if sys.has_positive_offset() {
        solve_positive_k(sys, budget)
    } else {
        enumerate_fixed_points(sys, opts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DescentOutcome {
    Found { point: PositiveVector, value: f64 },
    NotFound { final_value: f64 },
}

/// Minimises `F(y) = ‖Ψ(y)‖₂²` by gradient descent with Barzilai–Borwein
/// trial steps and Armijo backtracking, keeping iterates at or above
/// `LO_SAFETY`. Succeeds once `F < τ_fix²`.
pub fn descent_existence(sys: &ElectricSystem, start: &PositiveVector, budget: usize) -> Result<DescentOutcome> {
    if start.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: start.len() });
    }
    let f_of = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let grad = |y: &[f64], r: &[f64]| -> Vec<f64> { sys.jacobian_psi_raw(y).transpose().mul_vec(r).iter().map(|v| 2.0 * v).collect() };

    let mut y = start.to_vec();
    let r0 = sys.psi_raw(&y);
    let mut f = f_of(&r0);
    let mut g = grad(&y, &r0);
    let gn = norm2(&g);
    let mut t = if gn > 0.0 { 1.0 / gn } else { 1.0 };
    for _ in 0..budget {
        let tol = fixed_point_tol(&y);
        if f < tol * tol {
            return Ok(DescentOutcome::Found { point: PositiveVector::new(y)?, value: f });
        }
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if !(gg > 0.0) || !f.is_finite() {
            break;
        }
        let cap = y
            .iter()
            .zip(&g)
            .filter(|(_, gi)| **gi > 0.0)
            .map(|(yi, gi)| (yi - LO_SAFETY) / gi)
            .fold(f64::INFINITY, f64::min);
        let mut step = t.min(cap);
        let mut accepted = None;
        for _ in 0..80 {
            let cand: Vec<f64> = y.iter().zip(&g).map(|(a, b)| (a - step * b).max(LO_SAFETY)).collect();
            let rc = sys.psi_raw(&cand);
            let fc = f_of(&rc);
            if fc.is_finite() && fc <= f - 1e-4 * step * gg {
                accepted = Some((cand, rc, fc));
                break;
            }
            step /= 2.0;
        }
        let Some((ny, nr, nf)) = accepted else { break };
        let ng = grad(&ny, &nr);
        // Barzilai–Borwein trial step for the next iteration
        let s: Vec<f64> = ny.iter().zip(&y).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = ng.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let sdg: f64 = s.iter().zip(&dg).map(|(a, b)| a * b).sum();
        t = if sdg > 0.0 { ss / sdg } else { 2.0 * step };
        y = ny;
        f = nf;
        g = ng;
    }
    let tol = fixed_point_tol(&y);
    if f < tol * tol {
        return Ok(DescentOutcome::Found { point: PositiveVector::new(y)?, value: f });
    }
    Ok(DescentOutcome::NotFound { final_value: f })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub count: usize,
}

/// A change in root count, bisected to an interval of width at most
/// [`TRANSITION_WIDTH`].
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from_count: usize,
    pub to_count: usize,
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub entry: (usize, usize),
    pub rows: Vec<SweepRow>,
    pub transitions: Vec<Transition>,
}

/// Root counts of `template` with `M[i][j]` replaced by each value.
pub fn sweep_parameter(template: &ElectricSystem, entry: (usize, usize), values: &[f64], opts: &EnumerateOptions) -> Result<SweepReport> {
    let (i, j) = entry;
    let n = template.dim();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { index: i.max(j), n });
    }
    if let Some(&value) = values.iter().find(|v| **v < -NEG_TOL || !v.is_finite()) {
        return Err(Error::NegativeCoupling { row: i, col: j, value });
    }
    let count = |a: f64| -> Result<usize> { Ok(enumerate_fixed_points(&template.with_entry(i, j, a)?, opts)?.roots.len()) };
    let rows = values.iter().map(|&value| Ok(SweepRow { value, count: count(value)? })).collect::<Result<Vec<_>>>()?;
    let mut transitions = Vec::new();
    for w in rows.windows(2) {
        if w[0].count == w[1].count {
            continue;
        }
        let (mut lo, mut hi) = (w[0].value, w[1].value);
        while (hi - lo).abs() > TRANSITION_WIDTH {
            let mid = 0.5 * (lo + hi);
            if count(mid)? == w[0].count {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        transitions.push(Transition { from_count: w[0].count, to_count: w[1].count, lo, hi, estimate: 0.5 * (lo + hi) });
    }
    Ok(SweepReport { entry, rows, transitions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iterate::DEFAULT_BUDGET;
    use crate::matclass::is_p_matrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sys(k: &[f64], rows: &[&[f64]]) -> ElectricSystem {
        ElectricSystem::new(OrderedVector::from_slice(k).unwrap(), SquareMatrix::from_rows(rows).unwrap()).unwrap()
    }

    fn pv(v: &[f64]) -> PositiveVector {
        PositiveVector::from_slice(v).unwrap()
    }

    fn case_two(a: f64) -> ElectricSystem {
        sys(&[-9.0, -10.0], &[&[a, 1.0], &[1.0, 1.0]])
    }

    fn zero_diag(k: f64) -> ElectricSystem {
        sys(&[k, 0.0, 0.0], &[&[0.0, 0.0, 1.0], &[1.0, 0.0, 1.0], &[0.0, 0.0, 1.0]])
    }

    fn enumerate(s: &ElectricSystem) -> SolveReport {
        enumerate_fixed_points(s, &EnumerateOptions::for_dim(s.dim())).unwrap()
    }

    #[test]
    fn scalar_positive_k() {
        let r = solve_positive_k(&sys(&[3.0], &[&[1.0]]), DEFAULT_BUDGET).unwrap();
        let exact = (3.0 + libm::sqrt(13.0)) / 2.0;
        assert!((r.roots[0].point[0] - exact).abs() < 1e-12);
        assert!((r.roots[0].point[0] - 3.302775637).abs() < 1e-9);
        assert_eq!(r.certificates[0].kind, CertificateKind::UniquePositiveK);
        assert_eq!(r.bracket.as_ref().unwrap().verdict, TypeVerdict::TypeI);
    }

    #[test]
    fn case_one_unique_point() {
        let s = sys(&[1.0, 1.0], &[&[5.0, 1.0], &[1.0, 1.0]]);
        let r = solve_positive_k(&s, DEFAULT_BUDGET).unwrap();
        let y = &r.roots[0].point;
        assert!(s.residual_psi(y).unwrap().norm_inf() <= fixed_point_tol(y));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let start = pv(&[rng.random_range(0.01..10.0), rng.random_range(0.01..10.0)]);
            let t = fit(&s, &start, DEFAULT_BUDGET).unwrap();
            assert!(t.verdict.limit().unwrap().dist_inf(y) < 1e-10);
        }
    }

    #[test]
    fn constant_map_fixed_point() {
        let r = solve_positive_k(&sys(&[1.0, 1.0], &[&[0.0, 0.0], &[0.0, 0.0]]), 10).unwrap();
        assert_eq!(r.roots[0].point.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn positive_k_required() {
        assert!(matches!(solve_positive_k(&zero_diag(0.0), 10), Err(Error::NonPositiveOffset { index: 0, .. })));
        let slow = sys(&[1e-3], &[&[1.0]]);
        assert_eq!(solve_positive_k(&slow, 3), Err(Error::BudgetExhausted { budget: 3 }));
    }

    #[test]
    fn certify_examples() {
        let c = certify(&sys(&[1.0, 1.0], &[&[5.0, 1.0], &[1.0, 1.0]]));
        assert_eq!(c.kind, CertificateKind::UniquePositiveK);
        let s = zero_diag(-2.0);
        let c = certify(&s);
        assert_eq!(c.kind, CertificateKind::AtMostOneP0);
        assert!(c.reverify(&s));
        let s = case_two(0.5);
        let c = certify(&s);
        assert_eq!(c.kind, CertificateKind::None);
        assert!(c.reverify(&s));
        let s = case_two(2.0);
        let c = certify(&s);
        assert_eq!(c.kind, CertificateKind::ExistsP0PositiveDiag);
        assert!(c.reverify(&s));
        assert!(!c.reverify(&case_two(0.5)));
    }

    #[test]
    fn certify_large_degrades() {
        let n = 17;
        let k = OrderedVector::filled(n, -1.0).unwrap();
        let s = ElectricSystem::new(k, SquareMatrix::identity(n)).unwrap();
        let c = certify(&s);
        assert_eq!(c.kind, CertificateKind::None);
        assert!(c.reason.is_some());
        assert!(c.reverify(&s));
    }

    #[test]
    fn case_two_counts() {
        assert_eq!(enumerate(&case_two(0.0)).roots.len(), 0);
        assert_eq!(enumerate(&case_two(1.5)).roots.len(), 1);
        let r = enumerate(&case_two(0.75));
        assert_eq!(r.roots.len(), 3);
        assert!(r.comparable_pairs.is_empty());
        let want = [[0.0875, 1.9453], [0.2917, 0.1488], [0.8005, 0.1128]];
        for (root, w) in r.roots.iter().zip(want) {
            assert!((root.point[0] - w[0]).abs() < 1e-4 && (root.point[1] - w[1]).abs() < 1e-4, "{:?}", root.point);
        }
    }

    #[test]
    fn zero_diagonal_roots() {
        for k in [-0.5, 0.0, 1.0, 10.0] {
            let s = zero_diag(k);
            let r = solve(&s, DEFAULT_BUDGET, &EnumerateOptions::for_dim(3)).unwrap();
            assert_eq!(r.roots.len(), 1, "k = {k}");
            let want = [k + 1.0, (k + 2.0) / (k + 1.0), 1.0];
            assert!(dist_inf(&r.roots[0].point, &want) < 1e-10);
        }
        for k in [-1.0, -2.0] {
            let r = enumerate(&zero_diag(k));
            assert!(r.roots.is_empty());
            assert_eq!(r.certificates[0].kind, CertificateKind::AtMostOneP0);
        }
    }

    #[test]
    fn seeding_limits() {
        let n = 7;
        let s = ElectricSystem::new(OrderedVector::filled(n, -1.0).unwrap(), SquareMatrix::identity(n)).unwrap();
        let grid = EnumerateOptions { seeding: Seeding::Grid { per_axis: 2 }, ..EnumerateOptions::for_dim(n) };
        assert_eq!(enumerate_fixed_points(&s, &grid), Err(Error::TooLarge { n: 7, limit: MAX_GRID_DIM }));
        let list = EnumerateOptions { seeding: Seeding::List(vec![PositiveVector::new(vec![1.0; n]).unwrap()]), ..grid.clone() };
        let r = enumerate_fixed_points(&s, &list).unwrap();
        // y = −1 + 1/y per coordinate
        let want = (-1.0 + libm::sqrt(5.0)) / 2.0;
        assert!(r.roots[0].point.iter().all(|v| (v - want).abs() < 1e-12));
        let one = EnumerateOptions { seeding: Seeding::Grid { per_axis: 1 }, ..EnumerateOptions::for_dim(2) };
        assert!(enumerate_fixed_points(&case_two(1.0), &one).is_err());
    }

    #[test]
    fn descent_examples() {
        match descent_existence(&zero_diag(0.0), &pv(&[1.0, 1.0, 1.0]), DEFAULT_BUDGET).unwrap() {
            DescentOutcome::Found { point, .. } => assert!(dist_inf(&point, &[1.0, 2.0, 1.0]) < 1e-8),
            other => panic!("{other:?}"),
        }
        match descent_existence(&case_two(0.0), &pv(&[1.0, 1.0]), DEFAULT_BUDGET).unwrap() {
            DescentOutcome::NotFound { final_value } => assert!(final_value > 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_case_two() {
        let values: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let r = sweep_parameter(&case_two(0.0), (0, 0), &values, &EnumerateOptions::for_dim(2)).unwrap();
        let counts: Vec<usize> = r.rows.iter().map(|row| row.count).collect();
        assert_eq!(counts[0], 0);
        assert!(counts[1..=13].iter().all(|c| *c == 1));
        assert!(counts[14..=16].iter().all(|c| *c == 3));
        assert!(counts[17..].iter().all(|c| *c == 1));
        let up = r.transitions.iter().find(|t| t.from_count == 1 && t.to_count == 3).unwrap();
        let down = r.transitions.iter().find(|t| t.from_count == 3 && t.to_count == 1).unwrap();
        assert!(up.hi - up.lo <= TRANSITION_WIDTH);
        assert!((up.estimate - 0.686245).abs() < 1e-3);
        assert!((down.estimate - 0.838849).abs() < 1e-3);

        let flat: Vec<f64> = (0..=10).map(|i| 1.0 + i as f64 * 0.1).collect();
        let r = sweep_parameter(&case_two(0.0), (0, 0), &flat, &EnumerateOptions::for_dim(2)).unwrap();
        assert!(r.rows.iter().all(|row| row.count == 1));
        assert!(r.transitions.is_empty());

        let single = sweep_parameter(&case_two(0.0), (0, 0), &[0.75], &EnumerateOptions::for_dim(2)).unwrap();
        assert_eq!(single.rows[0].count, enumerate(&case_two(0.75)).roots.len());

        assert!(matches!(
            sweep_parameter(&case_two(0.0), (0, 0), &[0.5, -1.0], &EnumerateOptions::for_dim(2)),
            Err(Error::NegativeCoupling { .. })
        ));
        assert!(sweep_parameter(&case_two(0.0), (2, 0), &[0.5], &EnumerateOptions::for_dim(2)).is_err());
    }

    fn dominant_system() -> impl Strategy<Value = ElectricSystem> {
        (1usize..=3).prop_flat_map(|n| {
            (
                prop::collection::vec(-3.0..3.0f64, n),
                prop::collection::vec(0.0..1.0f64, n * n),
                prop::collection::vec(0.0..1.5f64, n),
                any::<bool>(),
            )
                .prop_map(move |(k, off, extra, zero_diag)| {
                    let mut m = SquareMatrix::new(n, off).unwrap();
                    for i in 0..n {
                        let row: f64 = (0..n).filter(|&j| j != i).map(|j| m.get(i, j)).sum();
                        // a zero diagonal forces the row to vanish to stay P0
                        if zero_diag && i == 0 {
                            for j in 0..n {
                                m.set(i, j, 0.0);
                            }
                        } else {
                            m.set(i, i, row + extra[i]);
                        }
                    }
                    ElectricSystem::new(OrderedVector::new(k).unwrap(), m).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn certificates_bound_root_counts(s in dominant_system()) {
            let c = certify(&s);
            let r = enumerate(&s);
            match c.kind {
                CertificateKind::ExistsP0PositiveDiag => prop_assert_eq!(r.roots.len(), 1),
                CertificateKind::AtMostOneP0 => prop_assert!(r.roots.len() <= 1),
                CertificateKind::UniquePositiveK => prop_assert_eq!(r.roots.len(), 1),
                CertificateKind::None => {}
            }
            prop_assert!(c.reverify(&s));
            for root in r.points() {
                let j = s.jacobian_psi(root).unwrap();
                prop_assert!(is_p_matrix(&j).unwrap().holds);
            }
        }

        #[test]
        fn roots_are_incomparable_and_bracketed(a in 0.0..2.0f64, b in 0.0..2.0f64, kk in -12.0..2.0f64) {
            let s = sys(&[kk, kk - 1.0], &[&[a, 1.0], &[1.0, b]]);
            let r = enumerate(&s);
            prop_assert!(r.comparable_pairs.is_empty());
            for root in &r.roots {
                prop_assert!(root.residual <= fixed_point_tol(&root.point));
            }
        }

        #[test]
        fn positive_k_root_inside_bracket(k in prop::collection::vec(0.05..4.0f64, 2), m in prop::collection::vec(0.0..3.0f64, 4)) {
            let s = ElectricSystem::new(OrderedVector::new(k).unwrap(), SquareMatrix::new(2, m).unwrap()).unwrap();
            let r = solve_positive_k(&s, DEFAULT_BUDGET).unwrap();
            let b = bracket_system(&s, DEFAULT_BUDGET).unwrap();
            prop_assert!(b.contains(&r.roots[0].point));
            let e = enumerate(&s);
            prop_assert_eq!(e.roots.len(), 1);
            prop_assert!(dist_inf(&e.roots[0].point, &r.roots[0].point) < 1e-9);
            match descent_existence(&s, &PositiveVector::try_from(s.k().clone()).unwrap(), DEFAULT_BUDGET).unwrap() {
                DescentOutcome::Found { point, .. } => {
                    prop_assert!(dist_inf(&point, &r.roots[0].point) <= 10.0 * fixed_point_tol(&r.roots[0].point));
                }
                DescentOutcome::NotFound { final_value } => prop_assert!(false, "descent stalled at {}", final_value),
            }
        }
    }
}
