//! Matrix-class certificates (Z, M, P, P₀) and the expansion of
//! `det(A + diag(x))` as a multilinear polynomial in `x`.
//!
//! Every certificate carries a witness that can be re-checked against the
//! matrix with [`MatrixClassCertificate::reverify`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::linalg::{spectral_radius, SquareMatrix};
use crate::vecorder::OrderedVector;
use crate::{Error, Result};

/// Off-diagonal slack for the Z test.
pub const Z_TOL: f64 = 1e-12;
/// Slack on `ρ(B) ≤ s` for the M test.
pub const EIG_TOL: f64 = 1e-9;
/// Largest dimension for exhaustive minor enumeration (`2ⁿ − 1` minors).
pub const MAX_EXHAUSTIVE_DIM: usize = 16;

/// Minor positivity tolerance `1e-10 · (1 + max|aᵢⱼ|ⁿ)`.
pub fn minor_tolerance(a: &SquareMatrix) -> f64 {
    1e-10 * (1.0 + libm::pow(a.max_abs(), a.dim() as f64))
}

/// Strictly increasing, nonempty list of 0-based indices. Displayed 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinorIndexSet(Vec<usize>);

impl MinorIndexSet {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet);
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        Ok(Self(indices))
    }

    /// Builds the set from a bit mask (bit `i` ↔ index `i`). Panics on an empty mask.
    pub fn from_mask(mask: u32) -> Self {
        assert!(mask != 0);
        Self((0..32).filter(|i| mask & (1 << i) != 0).collect())
    }

    pub fn mask(&self) -> u32 {
        self.0.iter().fold(0, |m, &i| m | (1 << i))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.0.contains(i)).collect()
    }
}

impl fmt::Debug for MinorIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// All nonempty subsets of `{0..n}` as masks, by size then lexicographically.
pub fn subsets_by_size(n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity((1usize << n) - 1);
    let mut combo: Vec<usize> = Vec::with_capacity(n);
    for r in 1..=n {
        combo.clear();
        combo.extend(0..r);
        loop {
            out.push(combo.iter().fold(0u32, |m, &i| m | (1 << i)));
            // advance to the next r-combination in lexicographic order
            let Some(pos) = (0..r).rev().find(|&p| combo[p] != p + n - r) else {
                break;
            };
            combo[pos] += 1;
            for q in pos + 1..r {
                combo[q] = combo[q - 1] + 1;
            }
        }
    }
    out
}

/// Determinant of the principal submatrix `A[α, α]` by LU.
pub fn principal_minor(a: &SquareMatrix, alpha: &MinorIndexSet) -> Result<f64> {
    if let Some(&index) = alpha.indices().iter().find(|&&i| i >= a.dim()) {
        return Err(Error::IndexOutOfRange { index, n: a.dim() });
    }
    Ok(a.principal(alpha.indices()).determinant())
}

fn minor_of_mask(a: &SquareMatrix, mask: u32) -> f64 {
    let idx: Vec<usize> = (0..a.dim()).filter(|i| mask & (1 << i) != 0).collect();
    a.principal(&idx).determinant()
}

/// Every principal minor, in canonical (size, lexicographic) order.
pub fn all_principal_minors(a: &SquareMatrix) -> Result<Vec<(MinorIndexSet, f64)>> {
    check_exhaustive(a.dim())?;
    Ok(subsets_by_size(a.dim())
        .into_iter()
        .map(|mask| (MinorIndexSet::from_mask(mask), minor_of_mask(a, mask)))
        .collect())
}

fn check_exhaustive(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE_DIM {
        return Err(Error::TooLarge { n, limit: MAX_EXHAUSTIVE_DIM });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixClass {
    Z,
    M,
    P,
    P0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EntryScan,
    SpectralRadius,
    MinorEnumeration,
    DiagPolynomialSampling,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Off-diagonal entry that breaks the Z sign pattern (0-based).
    Entry { row: usize, col: usize, value: f64 },
    /// Principal minor that breaks positivity / nonnegativity.
    Minor { indices: MinorIndexSet, value: f64 },
    /// `ρ(s·I − A) > s`.
    SpectralRadius { shift: f64, rho: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixClassCertificate {
    pub class: MatrixClass,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub method: Method,
    /// Principal minors within `±τ_pos` of zero (P and P₀ tests only).
    pub boundary: Vec<MinorIndexSet>,
    /// For a positive M verdict: whether the M-matrix is singular (`ρ(B) ≈ s`).
    pub singular: Option<bool>,
    /// The `(s, ρ(B))` pair behind an M verdict.
    pub spectral: Option<(f64, f64)>,
}

impl MatrixClassCertificate {
    fn new(class: MatrixClass, method: Method) -> Self {
        Self { class, holds: true, witness: None, method, boundary: Vec::new(), singular: None, spectral: None }
    }

    /// The class when it holds, `None` ("none of") otherwise.
    pub fn label(&self) -> Option<MatrixClass> {
        self.holds.then_some(self.class)
    }

    pub fn is_boundary(&self) -> bool {
        !self.boundary.is_empty()
    }

    /// Re-runs the check behind the verdict on `a` and confirms it.
    pub fn reverify(&self, a: &SquareMatrix) -> bool {
        let fresh = match self.class {
            MatrixClass::Z => Ok(is_z_matrix(a)),
            MatrixClass::M => Ok(is_m_matrix(a)),
            MatrixClass::P => is_p_matrix(a),
            MatrixClass::P0 => is_p0_matrix(a),
        };
        let Ok(fresh) = fresh else { return false };
        if fresh.holds != self.holds {
            return false;
        }
        match &self.witness {
            None => true,
            Some(Witness::Entry { row, col, value }) => {
                *row < a.dim() && *col < a.dim() && a.get(*row, *col) == *value && *value > Z_TOL
            }
            Some(Witness::Minor { indices, value }) => {
                let tol = minor_tolerance(a);
                let Ok(recomputed) = principal_minor(a, indices) else { return false };
                let violates = match self.class {
                    MatrixClass::P => recomputed <= tol,
                    _ => recomputed < -tol,
                };
                violates && (recomputed - value).abs() <= tol
            }
            Some(Witness::SpectralRadius { shift, rho }) => {
                let b = a.map(|i, j, v| if i == j { shift - v } else { -v });
                let again = spectral_radius(&b);
                again > shift + EIG_TOL && (again - rho).abs() <= 1e-9 * (1.0 + rho.abs())
            }
        }
    }
}

/// Z-matrix: every off-diagonal entry `≤ τ_z`. Witness: first violation in row-major order.
pub fn is_z_matrix(a: &SquareMatrix) -> MatrixClassCertificate {
    let mut cert = MatrixClassCertificate::new(MatrixClass::Z, Method::EntryScan);
    let n = a.dim();
    let bad = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && a.get(i, j) > Z_TOL);
    if let Some((row, col)) = bad {
        cert.holds = false;
        cert.witness = Some(Witness::Entry { row, col, value: a.get(row, col) });
    }
    cert
}

/// M-matrix: Z and `ρ(s·I − A) ≤ s + τ_eig` with `s = 1 + maxᵢ aᵢᵢ`.
pub fn is_m_matrix(a: &SquareMatrix) -> MatrixClassCertificate {
    let z = is_z_matrix(a);
    let mut cert = MatrixClassCertificate::new(MatrixClass::M, Method::SpectralRadius);
    if !z.holds {
        cert.holds = false;
        cert.method = Method::EntryScan;
        cert.witness = z.witness;
        return cert;
    }
    let n = a.dim();
    let shift = 1.0 + (0..n).map(|i| a.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    let b = a.map(|i, j, v| if i == j { shift - v } else { -v });
    let rho = spectral_radius(&b);
    cert.spectral = Some((shift, rho));
    if rho > shift + EIG_TOL {
        cert.holds = false;
        cert.witness = Some(Witness::SpectralRadius { shift, rho });
    } else {
        cert.singular = Some((rho - shift).abs() <= EIG_TOL);
    }
    cert
}

fn minor_certificate(a: &SquareMatrix, class: MatrixClass) -> Result<MatrixClassCertificate> {
    let tol = minor_tolerance(a);
    let mut cert = MatrixClassCertificate::new(class, Method::MinorEnumeration);
    for (indices, value) in all_principal_minors(a)? {
        if value.abs() <= tol {
            cert.boundary.push(indices.clone());
        }
        let violates = match class {
            MatrixClass::P => value <= tol,
            _ => value < -tol,
        };
        if violates && cert.holds {
            cert.holds = false;
            cert.witness = Some(Witness::Minor { indices, value });
        }
    }
    Ok(cert)
}

/// P-matrix: every principal minor `> τ_pos`. Witness: first failing minor
/// in (size, lexicographic) order.
pub fn is_p_matrix(a: &SquareMatrix) -> Result<MatrixClassCertificate> {
    minor_certificate(a, MatrixClass::P)
}

/// P₀-matrix: every principal minor `≥ −τ_pos`.
pub fn is_p0_matrix(a: &SquareMatrix) -> Result<MatrixClassCertificate> {
    minor_certificate(a, MatrixClass::P0)
}

/// `det(A + diag(x))` by direct LU.
pub fn det_plus_diag(a: &SquareMatrix, x: &OrderedVector) -> Result<f64> {
    Ok(a.plus_diag(x)?.determinant())
}

/// `P_A(X) = Σ_α det(A[α,α]) · X_{αᶜ}`, with the empty `α` contributing the
/// leading monomial `X₁⋯Xₙ` and `α = {1..n}` the constant `det(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagPolynomial {
    n: usize,
    // indexed by the mask of α (the kept indices); entry 0 is the leading coefficient 1
    minors: Vec<f64>,
}

impl DiagPolynomial {
    pub fn dim(&self) -> usize {
        self.n
    }

    fn full(&self) -> u32 {
        ((1u64 << self.n) - 1) as u32
    }

    pub fn constant(&self) -> f64 {
        self.minors[self.full() as usize]
    }

    /// Coefficient of the monomial `∏_{i ∈ vars} Xᵢ` (empty `vars` → constant).
    pub fn coefficient(&self, vars: &[usize]) -> f64 {
        let mask = vars.iter().fold(0u32, |m, &i| m | (1 << i));
        self.minors[(self.full() ^ mask) as usize]
    }

    /// Iterates `(monomial variables, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let full = self.full();
        (0..=full).map(move |alpha| {
            let vars = (0..self.n).filter(|i| (full ^ alpha) & (1 << i) != 0).collect();
            (vars, self.minors[alpha as usize])
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        let full = self.full();
        // monomial value for every variable mask, built from the lowest set bit
        let mut mono = vec![1.0; 1usize << self.n];
        for mask in 1..=full as usize {
            let low = mask.trailing_zeros() as usize;
            mono[mask] = mono[mask & (mask - 1)] * x[low];
        }
        Ok((0..=full).map(|alpha| self.minors[alpha as usize] * mono[(full ^ alpha) as usize]).sum())
    }
}

pub fn expand_diag_polynomial(a: &SquareMatrix) -> Result<DiagPolynomial> {
    let n = a.dim();
    check_exhaustive(n)?;
    let mut minors = vec![0.0; 1usize << n];
    minors[0] = 1.0;
    for mask in subsets_by_size(n) {
        minors[mask as usize] = minor_of_mask(a, mask);
    }
    Ok(DiagPolynomial { n, minors })
}

/// The five equivalent characterisations of a P₀-matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P0Statement {
    /// (i) all principal minors nonnegative
    MinorsNonnegative,
    /// (ii) `det(A + diag(x)) > 0` for positive `x`
    DetPositive,
    /// (iii) `det(A + diag(x)) ≥ 0` for nonnegative `x`
    DetNonnegativeClosed,
    /// (iv) `I + A·diag(x)` invertible for positive `x`
    Invertible,
    /// (v) `I + A·diag(x)` is a P-matrix for positive `x`
    PMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatementCheck {
    pub statement: P0Statement,
    pub holds: bool,
    pub samples: usize,
    /// Smallest scaled value seen (determinant, or minor for (v)).
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct P0EquivalenceReport {
    pub verdict: MatrixClassCertificate,
    pub checks: [StatementCheck; 5],
}

impl P0EquivalenceReport {
    pub fn all_agree(&self) -> bool {
        self.checks.iter().all(|c| c.holds == self.verdict.holds)
    }

    pub fn disagreements(&self) -> Vec<P0Statement> {
        self.checks.iter().filter(|c| c.holds != self.verdict.holds).map(|c| c.statement).collect()
    }
}

const CORNER_STEPS: [f64; 3] = [1e-2, 1e-4, 1e-6];
const MAX_CORNER_DIM: usize = 10;

/// Cross-checks the minor-enumeration P₀ verdict against statements
/// (ii)–(v) on `sample_count` log-uniform positive samples in `[1e-3, 1e3]ⁿ`
/// plus "corner" samples `x_α = t, x_{αᶜ} = 1/t` for each index set `α`
/// (only the witness set above dimension 10). A corner sample makes the
/// `α` term dominate `det(A + diag(x))` as `t → 0`, so a negative minor
/// shows up as a negative determinant.
///
/// Statement (iv) is judged by sign: `det(I + A·diag(x)) → 1` as `x → 0`,
/// so a non-positive sample implies a singular point on the segment.
pub fn check_p0_equivalences<R: Rng + ?Sized>(
    a: &SquareMatrix,
    sample_count: usize,
    rng: &mut R,
) -> Result<P0EquivalenceReport> {
    let n = a.dim();
    let verdict = is_p0_matrix(a)?;
    let mut positive: Vec<Vec<f64>> = (0..sample_count)
        .map(|_| (0..n).map(|_| libm::exp(rng.random_range(-3.0..3.0) * core::f64::consts::LN_10)).collect())
        .collect();
    let corner_sets: Vec<u32> = if n <= MAX_CORNER_DIM {
        subsets_by_size(n)
    } else {
        match &verdict.witness {
            Some(Witness::Minor { indices, .. }) => vec![indices.mask()],
            _ => Vec::new(),
        }
    };
    for &mask in &corner_sets {
        for &t in &CORNER_STEPS {
            positive.push((0..n).map(|i| if mask & (1 << i) != 0 { t } else { 1.0 / t }).collect());
        }
    }
    // closed orthant: zero out the kept set entirely
    let mut closed: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for &mask in &corner_sets {
        for s in [1e-3, 1.0, 1e3] {
            closed.push((0..n).map(|i| if mask & (1 << i) != 0 { 0.0 } else { s }).collect());
        }
    }

    let row_abs: Vec<f64> = a.rows().map(|r| r.iter().map(|v| v.abs()).sum()).collect();
    // relative to the Hadamard-type bound ∏(xᵢ + Σⱼ|aᵢⱼ|)
    let scaled_det = |x: &[f64]| -> f64 {
        let bound: f64 = x.iter().zip(&row_abs).map(|(xi, r)| xi + r).product::<f64>().max(1e-300);
        a.plus_diag(x).expect("dimension checked").determinant() / bound
    };
    let det_tol = 1e-10;

    let mut det_pos = StatementCheck { statement: P0Statement::DetPositive, holds: true, samples: 0, worst: f64::INFINITY };
    for x in &positive {
        let d = scaled_det(x);
        det_pos.samples += 1;
        det_pos.worst = det_pos.worst.min(d);
    }
    det_pos.holds = det_pos.worst > -det_tol;

    let mut det_closed =
        StatementCheck { statement: P0Statement::DetNonnegativeClosed, holds: true, samples: 0, worst: f64::INFINITY };
    for x in positive.iter().chain(&closed) {
        let d = scaled_det(x);
        det_closed.samples += 1;
        det_closed.worst = det_closed.worst.min(d);
    }
    det_closed.holds = det_closed.worst >= -det_tol;

    // (iv) and (v) use the reciprocal samples so that corners stay dominant;
    // minors are scaled by the row-sum bound of their own submatrix
    let mut invertible = StatementCheck { statement: P0Statement::Invertible, holds: true, samples: 0, worst: f64::INFINITY };
    let mut p_matrix = StatementCheck { statement: P0Statement::PMatrix, holds: true, samples: 0, worst: f64::INFINITY };
    let masks = subsets_by_size(n);
    let full = *masks.last().expect("n >= 1");
    for x in &positive {
        let m = a.map(|i, j, v| if i == j { 1.0 } else { 0.0 } + v / x[j]);
        for &mask in &masks {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sub = m.principal(&idx);
            let bound: f64 = sub.rows().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).product::<f64>().max(1e-300);
            let scaled = sub.determinant() / bound;
            p_matrix.worst = p_matrix.worst.min(scaled);
            if mask == full {
                invertible.worst = invertible.worst.min(scaled);
            }
        }
        invertible.samples += 1;
        p_matrix.samples += 1;
    }
    p_matrix.holds = p_matrix.worst > -det_tol;
    invertible.holds = invertible.worst > -det_tol;

    let minors = StatementCheck {
        statement: P0Statement::MinorsNonnegative,
        holds: verdict.holds,
        samples: 0,
        worst: match &verdict.witness {
            Some(Witness::Minor { value, .. }) => *value,
            _ => 0.0,
        },
    };
    Ok(P0EquivalenceReport { verdict, checks: [minors, det_pos, det_closed, invertible, p_matrix] })
}
