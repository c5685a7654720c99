//! Brute-force reference computations used by the test suites.
//!
//! Nothing here shares numerical code with `antitone-core`: residuals,
//! linear solves and determinants are recomputed from scratch.

use antitone_core::linalg::SquareMatrix;
use antitone_core::system::ElectricSystem;

/// Fixed point of the scalar map `y ↦ k + m/y`.
///
/// `m > 0`: `(k + √(k² + 4m))/2`, evaluated without cancellation for `k < 0`.
/// `m = 0`: `k` when positive, otherwise none.
pub fn closed_form_1d(k: f64, m: f64) -> Option<f64> {
    assert!(m >= 0.0, "coupling must be nonnegative");
    if m == 0.0 {
        return (k > 0.0).then_some(k);
    }
    let disc = (k * k + 4.0 * m).sqrt();
    Some(if k >= 0.0 { (k + disc) / 2.0 } else { 2.0 * m / (disc - k) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
    /// Log on axes spanning more than two decades, linear otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridScanResult {
    /// Grid nodes that are local minima of `‖Ψ‖∞` below the loose threshold.
    pub candidates: Vec<Vec<f64>>,
    /// Newton-polished, deduplicated roots in lexicographic order.
    pub roots: Vec<Vec<f64>>,
    /// Candidates more than one grid cell apart that polished to the same root.
    pub merged: usize,
}

impl GridScanResult {
    pub fn count(&self) -> usize {
        self.roots.len()
    }
}

struct Plain {
    n: usize,
    k: Vec<f64>,
    m: Vec<f64>,
}

impl Plain {
    fn new(sys: &ElectricSystem) -> Self {
        Self { n: sys.dim(), k: sys.k().to_vec(), m: sys.m().as_slice().to_vec() }
    }

    fn psi(&self, y: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut s = self.k[i];
            for j in 0..self.n {
                s += self.m[i * self.n + j] / y[j];
            }
            out[i] = y[i] - s;
        }
    }

    fn norm(&self, y: &[f64], buf: &mut [f64]) -> f64 {
        self.psi(y, buf);
        buf.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    /// `‖Ψ‖∞` relative to the size of the terms it balances.
    fn relative(&self, y: &[f64], buf: &mut [f64]) -> f64 {
        self.psi(y, buf);
        (0..self.n)
            .map(|i| {
                let terms: f64 = self.k[i].abs() + y[i] + (0..self.n).map(|j| self.m[i * self.n + j] / y[j]).sum::<f64>();
                buf[i].abs() / terms
            })
            .fold(0.0, f64::max)
    }

    fn jacobian(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut j = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                j[r * n + c] = if r == c { 1.0 } else { 0.0 } + self.m[r * n + c] / (y[c] * y[c]);
            }
        }
        j
    }
}

fn tau_fix(y: &[f64]) -> f64 {
    1e-10 * (1.0 + y.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
}

/// Gaussian elimination with partial pivoting on a copy.
fn gauss_solve(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs()))?;
        if a[p * n + c] == 0.0 {
            return None;
        }
        for j in 0..n {
            a.swap(c * n + j, p * n + j);
        }
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r * n + c] / a[c * n + c];
            for j in c..n {
                a[r * n + j] -= f * a[c * n + j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| a[r * n + j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn newton_polish(p: &Plain, start: &[f64]) -> Option<Vec<f64>> {
    let mut y = start.to_vec();
    let mut r = vec![0.0; p.n];
    for _ in 0..60 {
        if p.norm(&y, &mut r) <= tau_fix(&y) {
            return Some(y);
        }
        let d = gauss_solve(p.n, p.jacobian(&y), r.clone())?;
        for (yi, di) in y.iter_mut().zip(&d) {
            *yi -= di;
        }
        if y.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return None;
        }
    }
    (p.norm(&y, &mut r) <= tau_fix(&y)).then_some(y)
}

fn axis(lo: f64, hi: f64, count: usize, spacing: Spacing) -> Vec<f64> {
    let log = match spacing {
        Spacing::Linear => false,
        Spacing::Log => true,
        Spacing::Auto => hi > 100.0 * lo,
    };
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if log {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect()
}

/// Loose acceptance threshold for grid minima, on the relative residual.
const CANDIDATE_THRESHOLD: f64 = 0.25;

/// Scores `‖Ψ‖∞` on a `resolutionⁿ` grid over `[lo, hi]`, polishes every
/// local minimum below a loose threshold with undamped Newton and
/// deduplicates the roots. Supports `n ≤ 3`.
pub fn grid_scan(sys: &ElectricSystem, lo: &[f64], hi: &[f64], resolution: usize, spacing: Spacing) -> GridScanResult {
    let n = sys.dim();
    assert!((1..=3).contains(&n), "grid scan supports n ≤ 3");
    assert!(resolution >= 3, "resolution must be at least 3");
    assert!(lo.len() == n && hi.len() == n);
    assert!(lo.iter().all(|v| *v > 0.0), "box must be positive");
    let p = Plain::new(sys);
    let axes: Vec<Vec<f64>> = (0..n).map(|i| axis(lo[i], hi[i], resolution, spacing)).collect();
    let total = resolution.pow(n as u32);
    let unflatten = |mut idx: usize| -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(idx % resolution);
            idx /= resolution;
        }
        out
    };
    let flatten = |ix: &[usize]| ix.iter().rev().fold(0, |acc, i| acc * resolution + i);
    let node = |ix: &[usize]| -> Vec<f64> { ix.iter().enumerate().map(|(a, &i)| axes[a][i]).collect() };

    let mut buf = vec![0.0; n];
    let scores: Vec<f64> = (0..total).map(|idx| p.norm(&node(&unflatten(idx)), &mut buf)).collect();

    let offsets: Vec<Vec<isize>> = (0..3usize.pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let d = (c % 3) as isize - 1;
                    c /= 3;
                    d
                })
                .collect()
        })
        .filter(|d: &Vec<isize>| d.iter().any(|v| *v != 0))
        .collect();

    let mut minima: Vec<Vec<usize>> = Vec::new();
    for idx in 0..total {
        let s = scores[idx];
        if !s.is_finite() {
            continue;
        }
        let ix = unflatten(idx);
        let is_min = offsets.iter().all(|d| {
            let nb: Option<Vec<usize>> = ix
                .iter()
                .zip(d)
                .map(|(&i, &o)| {
                    let j = i as isize + o;
                    (0..resolution as isize).contains(&j).then_some(j as usize)
                })
                .collect();
            // ties are broken by index so plateaus yield one minimum
            nb.map_or(true, |nb| {
                let t = scores[flatten(&nb)];
                s < t || (s == t && idx <= flatten(&nb))
            })
        });
        if is_min && p.relative(&node(&ix), &mut buf) <= CANDIDATE_THRESHOLD {
            minima.push(ix);
        }
    }

    let mut roots: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    let mut merged = 0;
    for ix in &minima {
        let Some(y) = newton_polish(&p, &node(ix)) else { continue };
        let tol = 1e-6 * (1.0 + y.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
        match roots.iter().find(|(r, _)| r.iter().zip(&y).all(|(a, b)| (a - b).abs() <= tol)) {
            Some((_, first)) => {
                if first.iter().zip(ix).any(|(a, b)| a.abs_diff(*b) > 1) {
                    merged += 1;
                }
            }
            None => roots.push((y, ix.clone())),
        }
    }
    let mut roots: Vec<Vec<f64>> = roots.into_iter().map(|(y, _)| y).collect();
    roots.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let candidates = minima.iter().map(|ix| node(ix)).collect();
    GridScanResult { candidates, roots, merged }
}

/// Determinant of `A[α, α]` by cofactor expansion along the first row.
/// `alpha` is 0-based; `None` if it has more than 8 entries or an index is
/// out of range.
pub fn reference_minor(a: &SquareMatrix, alpha: &[usize]) -> Option<f64> {
    if alpha.len() > 8 || alpha.iter().any(|&i| i >= a.dim()) {
        return None;
    }
    let sub: Vec<Vec<f64>> = alpha.iter().map(|&i| alpha.iter().map(|&j| a.get(i, j)).collect()).collect();
    Some(cofactor(&sub))
}

fn cofactor(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .filter(|&c| m[0][c] != 0.0)
            .map(|c| {
                let minor: Vec<Vec<f64>> = m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| *v).collect()).collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][c] * cofactor(&minor)
            })
            .sum(),
    }
}

/// Smallest value of `det(A + diag(x))` over a tensor grid of positive `x`.
pub fn min_det_plus_diag(a: &SquareMatrix, values: &[f64]) -> f64 {
    let n = a.dim();
    assert!(n <= 8);
    let total = values.len().pow(n as u32);
    let all: Vec<usize> = (0..n).collect();
    (0..total)
        .map(|idx| {
            let shifted = a.map(|i, j, v| {
                if i == j {
                    v + values[(idx / values.len().pow(i as u32)) % values.len()]
                } else {
                    v
                }
            });
            reference_minor(&shifted, &all).expect("n ≤ 8")
        })
        .fold(f64::INFINITY, f64::min)
}
