//! Dense complex linear algebra: Cholesky, one-sided Jacobi SVD, nullspaces and
//! least squares.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, entries }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Self::from_entries(rows.len(), cols, entries)
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    /// Builds `re + i·im` from two real row-major tables.
    pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self, LinalgError> {
        if re.len() != im.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: re.len(),
                got: im.len(),
            });
        }
        let rows: Result<Vec<Vec<C64>>, LinalgError> = re
            .iter()
            .zip(im)
            .map(|(r, i)| {
                if r.len() != i.len() {
                    return Err(LinalgError::DimensionMismatch {
                        expected: r.len(),
                        got: i.len(),
                    });
                }
                Ok(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)).collect())
            })
            .collect();
        Self::from_rows(&rows?)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn real_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| C64::new(self[(i, j)].re, 0.0))
    }

    pub fn imag_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| C64::new(self[(i, j)].im, 0.0))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            kahan_sum((0..self.cols).map(|k| self[(i, k)] * other[(k, j)]))
        })
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| kahan_sum(self.row(i).iter().zip(x).map(|(a, b)| a * b)))
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Inverse via LU with partial pivoting.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let n = self.rows;
        if !self.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        let mut cols = Vec::with_capacity(n);
        let lu = Lu::new(self)?;
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            cols.push(lu.solve(&e));
        }
        Ok(Self::from_fn(n, n, |i, j| cols[j][i]))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Compensated (Kahan–Babuška) summation of complex terms.
pub fn kahan_sum(terms: impl IntoIterator<Item = C64>) -> C64 {
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    for t in terms {
        re.add(t.re);
        im.add(t.im);
    }
    C64::new(re.total(), im.total())
}

#[derive(Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values, used by the lattice sums.
#[derive(Default, Clone, Copy)]
pub(crate) struct KahanC {
    re: Neumaier,
    im: Neumaier,
}

impl KahanC {
    pub(crate) fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub(crate) fn total(&self) -> C64 {
        C64::new(self.re.total(), self.im.total())
    }
}

/// Hermitian inner product `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn dot_h(a: &[C64], b: &[C64]) -> C64 {
    kahan_sum(a.iter().zip(b).map(|(x, y)| x.conj() * y))
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Cholesky factor `L` (lower triangular) with `L·L* = M`.
pub fn cholesky_pd(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let n = m.rows();
    let scale = m.frobenius_norm();
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if asym > tol.max(1e-14) * scale.max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NotHermitian(asym));
    }
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let d = m[(j, j)].re - (0..j).map(|k| l[(j, k)].norm_sqr()).sum::<f64>();
        if !(d > tol * scale) {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let s = m[(i, j)] - kahan_sum((0..j).map(|k| l[(i, k)] * l[(j, k)].conj()));
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Thin SVD `M = U·diag(σ)·V*` computed by one-sided Jacobi on the columns.
///
/// `v` is always the full `cols × cols` unitary matrix, so wide matrices
/// expose their whole right nullspace.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// Left singular vectors as columns (zero columns where σ = 0).
    pub u: Vec<Vec<C64>>,
    /// Right singular vectors as columns.
    pub v: Vec<Vec<C64>>,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    svd_with_order(m, None)
}

fn svd_with_order(m: &ComplexMatrix, seed: Option<u64>) -> Svd {
    let (rows, n) = (m.rows(), m.cols());
    let mut a: Vec<Vec<C64>> = (0..n).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
        .collect();
    if let Some(s) = seed {
        pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    let eps = f64::EPSILON;
    // Columns this small are numerically zero; rotating them only amplifies
    // rounding in the phase.
    let tiny = (1e-60 * m.frobenius_norm()).powi(2);
    for _sweep in 0..80 {
        let mut rotated = false;
        for &(p, q) in &pairs {
            let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
            let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
            let gamma = dot_h(&a[p], &a[q]);
            let g = gamma.norm();
            if alpha <= tiny || beta <= tiny || g <= eps * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let phase = gamma / g;
            let zeta = (beta - alpha) / (2.0 * g);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let t = if zeta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            let ph = phase.conj();
            for k in 0..rows {
                let ap = a[p][k];
                let aq = a[q][k] * ph;
                a[p][k] = ap * c - aq * s;
                a[q][k] = ap * s + aq * c;
            }
            for k in 0..n {
                let vp = v[p][k];
                let vq = v[q][k] * ph;
                v[p][k] = vp * c - vq * s;
                v[q][k] = vp * s + vq * c;
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sig: Vec<(f64, usize)> = a.iter().enumerate().map(|(j, c)| (norm2(c), j)).collect();
    sig.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
    let singular_values = sig.iter().map(|s| s.0).collect();
    let u = sig
        .iter()
        .map(|&(s, j)| {
            if s > 0.0 {
                a[j].iter().map(|z| z / s).collect()
            } else {
                vec![C64::new(0.0, 0.0); rows]
            }
        })
        .collect();
    let v = sig.iter().map(|&(_, j)| v[j].clone()).collect();
    Svd {
        singular_values,
        u,
        v,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NullspaceResult {
    pub basis: Vec<Vec<C64>>,
    pub singular_values: Vec<f64>,
    pub rank_tolerance: f64,
}

impl NullspaceResult {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len() - self.basis.len()
    }
}

/// Right singular vectors with σ ≤ `rel_tol`·σ_max.
pub fn nullspace(m: &ComplexMatrix, rel_tol: f64) -> NullspaceResult {
    nullspace_seeded(m, rel_tol, None)
}

/// As [`nullspace`], with the Jacobi sweep order shuffled by `seed`.
pub fn nullspace_seeded(m: &ComplexMatrix, rel_tol: f64, seed: Option<u64>) -> NullspaceResult {
    let s = svd_with_order(m, seed);
    let smax = s.singular_values.first().copied().unwrap_or(0.0);
    let cut = rel_tol * smax;
    let basis = s
        .singular_values
        .iter()
        .zip(&s.v)
        .filter(|(&sv, _)| sv <= cut)
        .map(|(_, v)| v.clone())
        .collect();
    NullspaceResult {
        basis,
        singular_values: s.singular_values,
        rank_tolerance: rel_tol,
    }
}

/// Minimum-norm least-squares solution and residual norm `‖Ax − b‖`.
pub fn lstsq(a: &ComplexMatrix, b: &[C64]) -> (Vec<C64>, f64) {
    assert_eq!(a.rows(), b.len(), "lstsq shape mismatch");
    let s = svd(a);
    let smax = s.singular_values.first().copied().unwrap_or(0.0);
    let cut = smax * f64::EPSILON * (a.rows().max(a.cols()) as f64);
    let mut x = vec![C64::new(0.0, 0.0); a.cols()];
    for ((&sv, u), v) in s.singular_values.iter().zip(&s.u).zip(&s.v) {
        if sv <= cut {
            continue;
        }
        let coef = dot_h(u, b) / sv;
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += vi * coef;
        }
    }
    let ax = a.matvec(&x);
    let r = norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
    (x, r)
}

/// Relative distance of `b` from the column span of the given vectors.
pub fn span_residual(columns: &[Vec<C64>], b: &[C64]) -> f64 {
    let nb = norm2(b);
    if nb == 0.0 {
        return 0.0;
    }
    if columns.is_empty() {
        return 1.0;
    }
    let a = ComplexMatrix::from_fn(b.len(), columns.len(), |i, j| columns[j][i]);
    lstsq(&a, b).1 / nb
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(m: &ComplexMatrix) -> Result<Self, LinalgError> {
        let n = m.rows();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.max_abs();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[(i, k)].norm().partial_cmp(&lu[(j, k)].norm()).unwrap())
                .unwrap();
            if lu[(p, k)].norm() <= scale * 1e-300 || lu[(p, k)].norm() == 0.0 {
                return Err(LinalgError::Singular);
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.perm.len();
        let mut y: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let t = self.lu[(i, k)] * y[k];
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = self.lu[(i, k)] * y[k];
                y[i] -= t;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }
}

/// Solves the square complex system `A x = b`.
pub fn solve(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
    Ok(Lu::new(a)?.solve(b))
}

/// Solves a dense real system in place by Gaussian elimination with partial
/// pivoting. `a` is row-major `n × n`.
pub fn solve_real(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().partial_cmp(&a[j * n + k].abs()).unwrap())
            .unwrap();
        if a[p * n + k] == 0.0 || !a[p * n + k].is_finite() {
            return Err(LinalgError::Singular);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        for i in k + 1..n {
            let f = a[i * n + k] / a[k * n + k];
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i * n + j] * b[j];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(b)
}
