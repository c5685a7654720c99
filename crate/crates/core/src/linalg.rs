//! Dense square matrices with LU factorisation and a real eigenvalue solver.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::vecorder::OrderedVector;
use crate::{Error, Result};

/// Row-major `n × n` real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0);
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.rows().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn map(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let n = self.n;
        let data = self.data.iter().enumerate().map(|(idx, &v)| f(idx / n, idx % n, v)).collect();
        Self { n, data }
    }

    /// `self + diag(x)`.
    pub fn plus_diag(&self, x: &[f64]) -> Result<Self> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(self.map(|i, j, v| if i == j { v + x[i] } else { v }))
    }

    /// Principal submatrix on the (0-based, increasing) index list.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self { n: k, data }
    }

    /// 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> f64 {
        Lu::new(self).determinant()
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// LU factorisation with partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &SquareMatrix) -> Self {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Self { n, lu, perm, sign, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        (0..self.n).fold(self.sign, |acc, i| acc * self.lu[i * self.n + i])
    }

    /// Solves `A x = b`; `None` when a zero pivot was met.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        if self.singular {
            return None;
        }
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    pub fn inverse(&self) -> Option<SquareMatrix> {
        let n = self.n;
        let mut inv = SquareMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        Some(inv)
    }
}

/// `κ₁(A) = ‖A‖₁ ‖A⁻¹‖₁`, infinite for singular `A`.
pub fn condition_number_1(a: &SquareMatrix) -> f64 {
    match Lu::new(a).inverse() {
        Some(inv) => a.norm1() * inv.norm1(),
        None => f64::INFINITY,
    }
}

/// Solves `A x = b`, checking dimensions.
pub fn solve(a: &SquareMatrix, b: &OrderedVector) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.len() });
    }
    Lu::new(a).solve(b).ok_or(Error::Singular)
}

/// All eigenvalues of a real matrix as `(re, im)` pairs, via balancing,
/// Hessenberg reduction and the shifted QR iteration. `None` if the QR
/// iteration fails to deflate.
pub fn eigenvalues(a: &SquareMatrix) -> Option<Vec<(f64, f64)>> {
    let n = a.n;
    // 1-based working copy keeps the index arithmetic of the classical routines.
    let mut h = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a.get(i, j);
        }
    }
    balance(&mut h, n);
    to_hessenberg(&mut h, n);
    hessenberg_qr(&mut h, n)
}

/// `max |λ|`; dense QR for `n ≤ 64`, power iteration on `B + I` above
/// (valid for nonnegative `B`).
pub fn spectral_radius(b: &SquareMatrix) -> f64 {
    if b.n <= 64 {
        if let Some(ev) = eigenvalues(b) {
            return ev.iter().fold(0.0, |acc, &(re, im)| acc.max(libm::hypot(re, im)));
        }
    }
    perron_root(b)
}

fn perron_root(b: &SquareMatrix) -> f64 {
    let n = b.n;
    let mut x = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let mut y = b.mul_vec(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += xi;
        }
        let norm: f64 = y.iter().map(|v| v.abs()).sum();
        if norm == 0.0 {
            return 0.0;
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let next = norm - 1.0;
        let step = y.iter().zip(&x).fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()));
        x = y;
        if (next - lambda).abs() <= 1e-14 * (1.0 + next.abs()) && step < 1e-13 {
            return next;
        }
        lambda = next;
    }
    lambda
}

fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut().skip(1) {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn to_hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x: f64 = 0.0;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in m - 1..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in m + 1..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

fn hessenberg_qr(a: &mut [Vec<f64>], n: usize) -> Option<Vec<(f64, f64)>> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
            } else {
                y = a[nu - 1][nu - 1];
                w = a[nu][nu - 1] * a[nu - 1][nu];
                if l == nu - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = libm::sqrt(q.abs());
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nu - 1] = x + z;
                        wr[nu] = x + z;
                        if z != 0.0 {
                            wr[nu] = x - w / z;
                        }
                        wi[nu - 1] = 0.0;
                        wi[nu] = 0.0;
                    } else {
                        wr[nu - 1] = x + p;
                        wr[nu] = x + p;
                        wi[nu - 1] = -z;
                        wi[nu] = z;
                    }
                    nn -= 2;
                } else {
                    if its == 60 {
                        return None;
                    }
                    if its > 0 && its % 10 == 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nu {
                            a[i][i] -= x;
                        }
                        let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nu - 2;
                    loop {
                        z = a[m][m];
                        let rr = x - z;
                        let ss = y - z;
                        p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - rr - ss;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nu {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k + 1 <= nu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nu - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign(libm::sqrt(p * p + q * q + r * r), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nu - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nu < k + 3 { nu } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nu - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 1 || l as isize >= nn - 1 {
                break;
            }
        }
    }
    Some((1..=n).map(|i| (wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> SquareMatrix {
        SquareMatrix::new(n, (0..n * n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
    }

    #[test]
    fn determinant_small_cases() {
        let a = SquareMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!((a.determinant() + 2.0).abs() < 1e-14);
        assert_eq!(SquareMatrix::identity(3).determinant(), 1.0);
        let s = SquareMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(s.determinant(), 0.0);
    }

    #[test]
    fn solve_and_inverse() {
        let a = SquareMatrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]).unwrap();
        let b = OrderedVector::from_slice(&[1.0, 2.0, 3.0]).unwrap();
        let x = solve(&a, &b).unwrap();
        let ax = a.mul_vec(&x);
        for (u, v) in ax.iter().zip(b.iter()) {
            assert!((u - v).abs() < 1e-13);
        }
        let inv = Lu::new(&a).inverse().unwrap();
        let prod = a.mul_vec(&inv.mul_vec(&[1.0, -1.0, 0.5]));
        assert!((prod[0] - 1.0).abs() < 1e-13 && (prod[1] + 1.0).abs() < 1e-13);
        let s = SquareMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert_eq!(solve(&s, &OrderedVector::from_slice(&[1.0, 1.0]).unwrap()), Err(Error::Singular));
        assert!(condition_number_1(&s).is_infinite());
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(SquareMatrix::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=9 {
            for _ in 0..20 {
                let a = random_matrix(&mut rng, n, -3.0, 3.0);
                let mut ours = eigenvalues(&a).unwrap();
                let m = DMatrix::from_row_slice(n, n, a.as_slice());
                let mut theirs: Vec<(f64, f64)> =
                    m.complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect();
                let key = |v: &(f64, f64)| (libm::round(v.0 * 1e6), libm::round(v.1 * 1e6));
                ours.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
                theirs.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
                for (u, v) in ours.iter().zip(&theirs) {
                    assert!(
                        (u.0 - v.0).abs() < 1e-8 * (1.0 + v.0.abs()) && (u.1 - v.1).abs() < 1e-8 * (1.0 + v.1.abs()),
                        "n={n}: {u:?} vs {v:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn spectral_radius_of_rank_one_plus() {
        // B = [[1,1],[1,1]] has eigenvalues 0 and 2.
        let b = SquareMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!((spectral_radius(&b) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn perron_root_agrees_with_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3, 10, 30] {
            let b = random_matrix(&mut rng, n, 0.0, 1.0);
            let dense = spectral_radius(&b);
            let power = perron_root(&b);
            assert!((dense - power).abs() < 1e-9 * (1.0 + dense), "{dense} vs {power}");
        }
    }
}
