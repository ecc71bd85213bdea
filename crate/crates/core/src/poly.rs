//! Sparse complex polynomials: homogeneous forms in `g` variables, weighted
//! forms in `(U, V, W, c, d)`, and plain affine polynomials for the solvers.

use crate::linalg::{dot_h, kahan_sum, norm2, ComplexMatrix, C64};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("exponent {exp:?} does not have degree {degree}")]
    WrongDegree { exp: Vec<u32>, degree: u32 },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
}

/// Exponent vector ordered graded-lexicographically: lower total degree first,
/// then lexicographically larger exponents first (`u₁² < u₁u₂ < u₂²`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The ordering used for serialization and dense coefficient vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonomialOrder {
    #[default]
    GradedLex,
}

impl MonomialOrder {
    pub fn compare(&self, a: &[u32], b: &[u32]) -> Ordering {
        Monomial(a.to_vec()).cmp(&Monomial(b.to_vec()))
    }
}

/// All exponent vectors in `nvars` variables of total degree `degree`, in
/// graded-lex order.
pub fn monomials(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
    }
    if nvars == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(0, degree, &mut vec![0; nvars], &mut out);
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Number of orderings of a multiset with multiplicities `alpha`.
pub fn multinomial(alpha: &[u32]) -> f64 {
    let total: u32 = alpha.iter().sum();
    alpha.iter().fold(factorial(total), |acc, &a| acc / factorial(a))
}

fn mono_eval(exp: &[u32], x: &[C64]) -> C64 {
    exp.iter()
        .zip(x)
        .fold(C64::new(1.0, 0.0), |acc, (&e, &xi)| acc * xi.powu(e))
}

type Terms = BTreeMap<Monomial, C64>;

fn add_into(terms: &mut Terms, m: Monomial, c: C64) {
    if c == C64::new(0.0, 0.0) {
        return;
    }
    let e = terms.entry(m).or_insert(C64::new(0.0, 0.0));
    *e += c;
}

fn prune(terms: &mut Terms) {
    terms.retain(|_, c| *c != C64::new(0.0, 0.0));
}

fn mul_terms(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let e = ma.0.iter().zip(&mb.0).map(|(x, y)| x + y).collect();
            add_into(&mut out, Monomial(e), ca * cb);
        }
    }
    prune(&mut out);
    out
}

/// A general sparse polynomial in `nvars` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: Terms,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: Terms::new(),
        }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        add_into(&mut p.terms, Monomial(vec![0; nvars]), c);
        p
    }

    /// The linear form `Σ a_i x_i`.
    pub fn linear(coeffs: &[C64]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            add_into(&mut p.terms, Monomial(e), c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Result<Self, PolyError> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::DimensionMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            add_into(&mut p.terms, Monomial(e), c);
        }
        prune(&mut p.terms);
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], C64)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), *c))
    }

    pub fn coeff(&self, exp: &[u32]) -> C64 {
        self.terms
            .get(&Monomial(exp.to_vec()))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn evaluate(&self, x: &[C64]) -> Result<C64, PolyError> {
        if x.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: x.len(),
            });
        }
        Ok(kahan_sum(self.terms.iter().map(|(m, c)| c * mono_eval(&m.0, x))))
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut ex = m.0.clone();
            ex[i] -= 1;
            add_into(&mut out.terms, Monomial(ex), c * e as f64);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            add_into(&mut out.terms, m.clone(), *c);
        }
        prune(&mut out.terms);
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        prune(&mut out.terms);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        Poly {
            nvars: self.nvars,
            terms: mul_terms(&self.terms, &other.terms),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.nvars, C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// `p(A·x)` where `A` has `nvars` rows; the result lives in `A.cols()` variables.
    pub fn compose_linear(&self, a: &ComplexMatrix) -> Result<Self, PolyError> {
        if a.rows() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: a.rows(),
            });
        }
        let forms: Vec<Poly> = (0..self.nvars).map(|i| Poly::linear(a.row(i))).collect();
        let maxdeg = self.terms.keys().flat_map(|m| m.0.iter().copied()).max().unwrap_or(0);
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(self.nvars);
        for f in &forms {
            let mut ps = vec![Poly::constant(a.cols(), C64::new(1.0, 0.0))];
            for k in 1..=maxdeg as usize {
                let next = ps[k - 1].mul(f);
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut out = Poly::zero(a.cols());
        for (m, c) in &self.terms {
            let mut t = Poly::constant(a.cols(), *c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]);
                }
            }
            for (mm, cc) in t.terms {
                add_into(&mut out.terms, mm, cc);
            }
        }
        prune(&mut out.terms);
        Ok(out)
    }

    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A homogeneous polynomial of fixed degree in `nvars` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoly {
    degree: u32,
    inner: Poly,
}

/// Outcome of [`proportional`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportionality {
    pub proportional: bool,
    pub scale: C64,
    pub dist: f64,
}

impl HomogeneousPoly {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        HomogeneousPoly {
            degree,
            inner: Poly::zero(nvars),
        }
    }

    pub fn from_terms(
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, C64)>,
    ) -> Result<Self, PolyError> {
        let terms: Vec<_> = terms.into_iter().collect();
        for (e, _) in &terms {
            if e.len() == nvars && e.iter().sum::<u32>() != degree {
                return Err(PolyError::WrongDegree {
                    exp: e.clone(),
                    degree,
                });
            }
        }
        Ok(HomogeneousPoly {
            degree,
            inner: Poly::from_terms(nvars, terms)?,
        })
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real_terms(nvars: usize, degree: u32, terms: &[(&[u32], f64)]) -> Result<Self, PolyError> {
        Self::from_terms(
            nvars,
            degree,
            terms.iter().map(|(e, c)| (e.to_vec(), C64::new(*c, 0.0))),
        )
    }

    pub fn from_poly(p: Poly, degree: u32) -> Result<Self, PolyError> {
        for (e, _) in p.terms() {
            if e.iter().sum::<u32>() != degree {
                return Err(PolyError::WrongDegree {
                    exp: e.to_vec(),
                    degree,
                });
            }
        }
        Ok(HomogeneousPoly { degree, inner: p })
    }

    pub fn nvars(&self) -> usize {
        self.inner.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn as_poly(&self) -> &Poly {
        &self.inner
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], C64)> {
        self.inner.terms()
    }

    pub fn num_terms(&self) -> usize {
        self.inner.terms.len()
    }

    pub fn coeff(&self, exp: &[u32]) -> C64 {
        self.inner.coeff(exp)
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    pub fn evaluate(&self, x: &[C64]) -> Result<C64, PolyError> {
        self.inner.evaluate(x)
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        Ok(HomogeneousPoly {
            degree: self.degree,
            inner: self.inner.add(&other.inner),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        HomogeneousPoly {
            degree: self.degree,
            inner: self.inner.scale(s),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        if self.nvars() != other.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars(),
                got: other.nvars(),
            });
        }
        Ok(HomogeneousPoly {
            degree: self.degree + other.degree,
            inner: self.inner.mul(&other.inner),
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars() != other.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars(),
                got: other.nvars(),
            });
        }
        if self.degree != other.degree {
            return Err(PolyError::DegreeMismatch(self.degree, other.degree));
        }
        Ok(())
    }

    /// `p(A·x)`; for the basis change pass `A = Π_a⁻¹`.
    pub fn substitute_linear(&self, a: &ComplexMatrix) -> Result<Self, PolyError> {
        if a.rows() != self.nvars() || a.cols() != self.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars(),
                got: if a.rows() != self.nvars() { a.rows() } else { a.cols() },
            });
        }
        Ok(HomogeneousPoly {
            degree: self.degree,
            inner: self.inner.compose_linear(a)?,
        })
    }

    /// Divides by the largest coefficient (earliest monomial on ties).
    pub fn normalize(&self) -> Result<Self, PolyError> {
        let mut best: Option<(&Monomial, C64)> = None;
        for (m, &c) in &self.inner.terms {
            if best.map_or(true, |(_, b)| c.norm() > b.norm()) {
                best = Some((m, c));
            }
        }
        let (pivot, b) = best.ok_or(PolyError::ZeroPolynomial)?;
        let mut out = self.scale(b.inv());
        out.inner.terms.insert(pivot.clone(), C64::new(1.0, 0.0));
        Ok(out)
    }

    /// Dense coefficients over [`monomials`]`(nvars, degree)`.
    pub fn coeff_vector(&self) -> Vec<C64> {
        monomials(self.nvars(), self.degree)
            .into_iter()
            .map(|e| self.inner.coeff(&e))
            .collect()
    }

    pub fn from_coeff_vector(nvars: usize, degree: u32, v: &[C64]) -> Result<Self, PolyError> {
        let basis = monomials(nvars, degree);
        if basis.len() != v.len() {
            return Err(PolyError::DimensionMismatch {
                expected: basis.len(),
                got: v.len(),
            });
        }
        Self::from_terms(nvars, degree, basis.into_iter().zip(v.iter().copied()))
    }

    pub fn coeff_norm(&self) -> f64 {
        self.inner.coeff_norm()
    }

    /// Drops coefficients below `rel·max|coeff|`.
    pub fn chop(&self, rel: f64) -> Self {
        let m = self.inner.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let mut out = self.clone();
        out.inner.terms.retain(|_, c| c.norm() > rel * m);
        out
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            nvars: self.nvars(),
            degree: self.degree,
            terms: self
                .inner
                .terms()
                .map(|(e, c)| TermJson {
                    exp: e.to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self, PolyError> {
        Self::from_terms(
            j.nvars,
            j.degree,
            j.terms.iter().map(|t| (t.exp.clone(), C64::new(t.re, t.im))),
        )
    }
}

/// Optimal complex scale `s` minimizing `‖p − s·q‖` and the relative residual.
pub fn proportional(p: &HomogeneousPoly, q: &HomogeneousPoly, tol: f64) -> Result<Proportionality, PolyError> {
    p.check_compatible(q)?;
    if p.is_zero() || q.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let (vp, vq) = (p.coeff_vector(), q.coeff_vector());
    let s = dot_h(&vq, &vp) / dot_h(&vq, &vq).re;
    let r: Vec<C64> = vp.iter().zip(&vq).map(|(a, b)| a - s * b).collect();
    let dist = norm2(&r) / norm2(&vp);
    Ok(Proportionality {
        proportional: dist <= tol,
        scale: s,
        dist,
    })
}

impl fmt::Display for HomogeneousPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.inner.terms().enumerate() {
            let coef = if c.im == 0.0 {
                let s = format!("{}", c.re.abs());
                if k == 0 && c.re < 0.0 {
                    format!("-{s}")
                } else if k > 0 {
                    format!(" {} {s}", if c.re < 0.0 { "-" } else { "+" })
                } else {
                    s
                }
            } else {
                format!("{}({}{:+}i)", if k > 0 { " + " } else { "" }, c.re, c.im)
            };
            write!(f, "{coef}")?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*u{}", i + 1)?,
                    _ => write!(f, "*u{}^{}", i + 1, p)?,
                }
            }
        }
        Ok(())
    }
}

/// A homogeneous polynomial with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerPoly {
    pub nvars: usize,
    pub degree: u32,
    pub terms: Vec<(Vec<u32>, i64)>,
}

impl IntegerPoly {
    pub fn to_homogeneous(&self) -> HomogeneousPoly {
        HomogeneousPoly::from_terms(
            self.nvars,
            self.degree,
            self.terms.iter().map(|(e, c)| (e.clone(), C64::new(*c as f64, 0.0))),
        )
        .expect("shape preserved from the source polynomial")
    }
}

impl fmt::Display for IntegerPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.to_homogeneous();
        write!(f, "{h}")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoundingError {
    #[error("zero polynomial")]
    Zero,
    #[error("no common phase: imaginary part {0:e} relative to the largest coefficient")]
    NotReal(f64),
    #[error("coefficient ratio {0} has no rational approximation with denominator <= {1}")]
    NoRational(f64, i64),
    #[error("integer coefficients overflow")]
    Overflow,
}

#[derive(Debug, Clone, Copy)]
pub struct RoundingOptions {
    /// Coefficients below `zero_tol·max|c|` are treated as zero.
    pub zero_tol: f64,
    /// Allowed imaginary part after removing the common phase.
    pub imag_tol: f64,
    /// Allowed error in each ratio to the smallest nonzero coefficient.
    pub ratio_tol: f64,
    pub max_den: i64,
}

impl Default for RoundingOptions {
    fn default() -> Self {
        RoundingOptions {
            zero_tol: 1e-8,
            imag_tol: 1e-6,
            ratio_tol: 1e-6,
            max_den: 10_000,
        }
    }
}

/// Best rational `p/q` with `q ≤ max_den` from the continued fraction of `x`
/// that lies within `tol` of `x`.
fn rational(x: f64, tol: f64, max_den: i64) -> Option<(i64, i64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        if (x - h2 as f64 / k2 as f64).abs() <= tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Rescales `p` to coprime integer coefficients with a positive leading term,
/// returning the integers and the largest deviation `|s·c − n|` over all
/// coefficients for the best real scale `s`.
pub fn round_to_integers(p: &HomogeneousPoly, opts: &RoundingOptions) -> Result<(IntegerPoly, f64), RoundingError> {
    let terms: Vec<(Vec<u32>, C64)> = p.terms().map(|(e, c)| (e.to_vec(), c)).collect();
    let big = terms
        .iter()
        .map(|(_, c)| *c)
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or(RoundingError::Zero)?;
    let phase = big / big.norm();
    let cmax = big.norm();
    let rot: Vec<C64> = terms.iter().map(|(_, c)| c / phase).collect();
    let worst_im = rot.iter().map(|c| c.im.abs()).fold(0.0, f64::max) / cmax;
    if worst_im > opts.imag_tol {
        return Err(RoundingError::NotReal(worst_im));
    }
    let sig: Vec<bool> = rot.iter().map(|c| c.re.abs() > opts.zero_tol * cmax).collect();
    let pivot = rot
        .iter()
        .zip(&sig)
        .filter(|(_, &s)| s)
        .map(|(c, _)| c.re)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or(RoundingError::Zero)?;
    let mut fracs = Vec::with_capacity(rot.len());
    let mut lcm: i64 = 1;
    for (c, &s) in rot.iter().zip(&sig) {
        if !s {
            fracs.push((0, 1));
            continue;
        }
        let r = c.re / pivot;
        let (num, den) = rational(r, opts.ratio_tol * r.abs().max(1.0), opts.max_den)
            .ok_or(RoundingError::NoRational(r, opts.max_den))?;
        lcm = (lcm / gcd(lcm, den)).checked_mul(den).ok_or(RoundingError::Overflow)?;
        fracs.push((num, den));
    }
    let mut ints: Vec<i64> = fracs
        .iter()
        .map(|&(n, d)| n.checked_mul(lcm / d).ok_or(RoundingError::Overflow))
        .collect::<Result<_, _>>()?;
    let g = ints.iter().fold(0, |acc, &v| gcd(acc, v));
    let lead = ints.iter().copied().find(|&v| v != 0).ok_or(RoundingError::Zero)?;
    let sign = lead.signum();
    for v in &mut ints {
        *v = *v / g * sign;
    }
    // Least-squares real scale taking the rotated coefficients to the integers.
    let num: f64 = rot.iter().zip(&ints).map(|(c, &n)| c.re * n as f64).sum();
    let den: f64 = rot.iter().map(|c| c.re * c.re).sum();
    let s = num / den;
    let err = rot
        .iter()
        .zip(&ints)
        .map(|(c, &n)| (c * s - n as f64).norm())
        .fold(0.0, f64::max);
    let out = IntegerPoly {
        nvars: p.nvars(),
        degree: p.degree(),
        terms: terms.into_iter().zip(ints).filter(|(_, n)| *n != 0).map(|((e, _), n)| (e, n)).collect(),
    };
    Ok((out, err))
}

/// Polynomial interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub nvars: usize,
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Weights of the blocks `U, V, W, c, d`.
pub const WEIGHTS: [u32; 5] = [1, 2, 3, 2, 4];

/// A polynomial in `(u₁..u_g, v₁..v_g, w₁..w_g, c, d)` graded by the weights
/// `(1, 2, 3, 2, 4)`, stored as blocks keyed by weighted degree.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedPoly {
    genus: usize,
    blocks: BTreeMap<u32, Poly>,
}

/// Variable index helpers for the extended list.
#[derive(Debug, Clone, Copy)]
pub struct GradedVars {
    pub genus: usize,
}

impl GradedVars {
    pub fn nvars(&self) -> usize {
        3 * self.genus + 2
    }
    pub fn u(&self, i: usize) -> usize {
        i
    }
    pub fn v(&self, i: usize) -> usize {
        self.genus + i
    }
    pub fn w(&self, i: usize) -> usize {
        2 * self.genus + i
    }
    pub fn c(&self) -> usize {
        3 * self.genus
    }
    pub fn d(&self) -> usize {
        3 * self.genus + 1
    }
    pub fn weight(&self, var: usize) -> u32 {
        match var {
            x if x < self.genus => WEIGHTS[0],
            x if x < 2 * self.genus => WEIGHTS[1],
            x if x < 3 * self.genus => WEIGHTS[2],
            x if x == 3 * self.genus => WEIGHTS[3],
            _ => WEIGHTS[4],
        }
    }
    pub fn weighted_degree(&self, exp: &[u32]) -> u32 {
        exp.iter().enumerate().map(|(i, &e)| e * self.weight(i)).sum()
    }

    /// All monomials of the given weighted degree, in graded-lex order.
    pub fn monomials(&self, wdeg: u32) -> Vec<Vec<u32>> {
        let n = self.nvars();
        let mut out = Vec::new();
        for deg in 0..=wdeg {
            for e in monomials(n, deg) {
                if self.weighted_degree(&e) == wdeg {
                    out.push(e);
                }
            }
        }
        out
    }
}

/// Which block of variables a monomial touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    U,
    V,
    W,
    C,
    D,
}

impl GradedPoly {
    pub fn zero(genus: usize) -> Self {
        GradedPoly {
            genus,
            blocks: BTreeMap::new(),
        }
    }

    pub fn vars(&self) -> GradedVars {
        GradedVars { genus: self.genus }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Builds from a general polynomial in the `3g + 2` extended variables.
    pub fn from_poly(genus: usize, p: &Poly) -> Self {
        let vars = GradedVars { genus };
        assert_eq!(p.nvars(), vars.nvars());
        let mut blocks: BTreeMap<u32, Poly> = BTreeMap::new();
        for (e, c) in p.terms() {
            let wd = vars.weighted_degree(e);
            let b = blocks.entry(wd).or_insert_with(|| Poly::zero(vars.nvars()));
            add_into(&mut b.terms, Monomial(e.to_vec()), c);
        }
        GradedPoly { genus, blocks }
    }

    pub fn to_poly(&self) -> Poly {
        let n = self.vars().nvars();
        self.blocks.values().fold(Poly::zero(n), |acc, b| acc.add(b))
    }

    pub fn blocks(&self) -> &BTreeMap<u32, Poly> {
        &self.blocks
    }

    pub fn is_weighted_homogeneous(&self, wdeg: u32) -> bool {
        self.blocks.keys().all(|&k| k == wdeg)
    }

    pub fn coeff(&self, exp: &[u32]) -> C64 {
        let wd = self.vars().weighted_degree(exp);
        self.blocks
            .get(&wd)
            .map_or(C64::new(0.0, 0.0), |b| b.coeff(exp))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_poly(self.genus, &self.to_poly().add(&other.to_poly()))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_poly(self.genus, &self.to_poly().scale(s))
    }

    pub fn evaluate(&self, u: &[C64], v: &[C64], w: &[C64], c: C64, d: C64) -> C64 {
        let mut x = Vec::with_capacity(self.vars().nvars());
        x.extend_from_slice(u);
        x.extend_from_slice(v);
        x.extend_from_slice(w);
        x.push(c);
        x.push(d);
        self.to_poly().evaluate(&x).expect("length checked by construction")
    }

    /// Dense coefficients over [`GradedVars::monomials`]`(wdeg)`.
    pub fn coeff_vector(&self, wdeg: u32) -> Vec<C64> {
        self.vars()
            .monomials(wdeg)
            .iter()
            .map(|e| self.coeff(e))
            .collect()
    }

    /// Blocks a monomial involves, e.g. `c·u₁u₂` involves U and C.
    pub fn blocks_of(&self, exp: &[u32]) -> Vec<Block> {
        let g = self.genus;
        let mut out = Vec::new();
        let any = |r: std::ops::Range<usize>| exp[r].iter().any(|&e| e > 0);
        if any(0..g) {
            out.push(Block::U);
        }
        if any(g..2 * g) {
            out.push(Block::V);
        }
        if any(2 * g..3 * g) {
            out.push(Block::W);
        }
        if exp[3 * g] > 0 {
            out.push(Block::C);
        }
        if exp[3 * g + 1] > 0 {
            out.push(Block::D);
        }
        out
    }

    /// The part involving only the U variables, as a form in `g` variables.
    pub fn u_part(&self) -> Poly {
        let g = self.genus;
        let terms = self
            .to_poly()
            .terms()
            .filter(|(e, _)| e[g..].iter().all(|&x| x == 0))
            .map(|(e, c)| (e[..g].to_vec(), c))
            .collect::<Vec<_>>();
        Poly::from_terms(g, terms).expect("lengths agree")
    }

    /// Largest coefficient magnitude among monomials touching V, W, c or d.
    pub fn max_non_u_coeff(&self) -> f64 {
        let g = self.genus;
        self.to_poly()
            .terms()
            .filter(|(e, _)| e[g..].iter().any(|&x| x > 0))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn random_poly(rng: &mut ChaCha8Rng, nvars: usize, degree: u32) -> HomogeneousPoly {
        let basis = monomials(nvars, degree);
        let v: Vec<C64> = basis
            .iter()
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        HomogeneousPoly::from_coeff_vector(nvars, degree, &v).unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)) + if i == j { c(2.0) } else { c(0.0) }
        })
    }

    #[test]
    fn graded_lex_order() {
        assert_eq!(monomials(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(monomials(4, 4).len(), 35);
        for g in 1..=8u64 {
            for d in 0..=5u64 {
                assert_eq!(monomials(g as usize, d as u32).len() as u64, binomial(g - 1 + d, d));
            }
        }
        let m = monomials(3, 3);
        assert!(m.windows(2).all(|w| Monomial(w[0].clone()) < Monomial(w[1].clone())));
    }

    #[test]
    fn evaluate_examples() {
        let p = HomogeneousPoly::from_real_terms(4, 2, &[(&[1, 0, 0, 1], 1.0), (&[0, 1, 1, 0], -1.0)]).unwrap();
        assert_eq!(p.evaluate(&[c(1.0); 4]).unwrap(), c(0.0));
        assert_eq!(p.evaluate(&[c(0.0); 4]).unwrap(), c(0.0));
        assert!(p.evaluate(&[c(1.0); 3]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_poly(&mut rng, 3, 4);
        let x: Vec<C64> = (0..3).map(|_| C64::new(rng.random(), rng.random())).collect();
        let t = C64::new(0.7, -1.3);
        let lhs = q.evaluate(&x.iter().map(|z| z * t).collect::<Vec<_>>()).unwrap();
        let rhs = q.evaluate(&x).unwrap() * t.powu(4);
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn substitution_examples() {
        let p = HomogeneousPoly::from_real_terms(2, 2, &[(&[2, 0], 1.0)]).unwrap();
        assert_eq!(p.substitute_linear(&ComplexMatrix::identity(2)).unwrap(), p);
        let swap = ComplexMatrix::from_rows(&[vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]).unwrap();
        let q = p.substitute_linear(&swap).unwrap();
        assert_eq!(q, HomogeneousPoly::from_real_terms(2, 2, &[(&[0, 2], 1.0)]).unwrap());
    }

    #[test]
    fn substitution_round_trip_and_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let p = random_poly(&mut rng, 4, 4);
            let a = random_matrix(&mut rng, 4);
            let ai = a.inverse().unwrap();
            let q = p.substitute_linear(&a).unwrap();
            let back = q.substitute_linear(&ai).unwrap();
            let d = back.sub(&p).unwrap().coeff_norm() / p.coeff_norm();
            assert!(d < 1e-9, "{d}");
            let x: Vec<C64> = (0..4).map(|_| C64::new(rng.random(), rng.random())).collect();
            let lhs = q.evaluate(&x).unwrap();
            let rhs = p.evaluate(&a.matvec(&x)).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());
        }
    }

    #[test]
    fn normalize_examples() {
        let p = HomogeneousPoly::from_real_terms(2, 2, &[(&[2, 0], 2.0)]).unwrap();
        assert_eq!(p.normalize().unwrap(), HomogeneousPoly::from_real_terms(2, 2, &[(&[2, 0], 1.0)]).unwrap());
        let q = HomogeneousPoly::from_terms(2, 2, vec![(vec![1, 1], C64::new(0.0, 1.0)), (vec![0, 2], c(1.0))]).unwrap();
        let n = q.normalize().unwrap();
        assert_eq!(n.coeff(&[1, 1]), c(1.0));
        assert!((n.coeff(&[0, 2]) - C64::new(0.0, -1.0)).norm() < 1e-16);
        assert_eq!(HomogeneousPoly::zero(2, 2).normalize(), Err(PolyError::ZeroPolynomial));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_poly(&mut rng, 3, 4).normalize().unwrap();
            assert_eq!(p.normalize().unwrap(), p);
        }
    }

    #[test]
    fn proportional_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_poly(&mut rng, 3, 4);
        let r = proportional(&q.scale(c(3.0)), &q, 1e-12).unwrap();
        assert!(r.proportional && (r.scale - c(3.0)).norm() < 1e-12 && r.dist < 1e-14);

        let a = HomogeneousPoly::from_real_terms(2, 2, &[(&[2, 0], 1.0)]).unwrap();
        let b = HomogeneousPoly::from_real_terms(2, 2, &[(&[0, 2], 1.0)]).unwrap();
        let r = proportional(&a, &b, 1e-6).unwrap();
        assert!(!r.proportional && r.scale == c(0.0) && (r.dist - 1.0).abs() < 1e-15);

        let e = random_poly(&mut rng, 3, 4);
        let e = e.scale(c(1.0 / e.coeff_norm()));
        let p = q.add(&e.scale(c(1e-9))).unwrap();
        let r = proportional(&p, &q, 1e-6).unwrap();
        assert!(r.proportional);
        assert!(r.dist <= 1.01e-9 / q.coeff_norm() + 1e-15);

        for _ in 0..20 {
            let s = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let r = proportional(&q.scale(s), &q, 1e-9).unwrap();
            assert!((r.scale - s).norm() < 1e-12);
        }
    }

    #[test]
    fn coeff_vector_round_trip_and_json() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_poly(&mut rng, 4, 4);
        let v = p.coeff_vector();
        assert_eq!(v.len(), 35);
        assert_eq!(HomogeneousPoly::from_coeff_vector(4, 4, &v).unwrap(), p);
        let s = serde_json::to_string(&p.to_json()).unwrap();
        let back: PolyJson = serde_json::from_str(&s).unwrap();
        assert_eq!(HomogeneousPoly::from_json(&back).unwrap(), p);
    }

    #[test]
    fn weighted_monomials() {
        let vars = GradedVars { genus: 2 };
        let m = vars.monomials(4);
        assert!(m.iter().all(|e| vars.weighted_degree(e) == 4));
        // u-quartics 5, u²v 3·2, u²c 3, uw 4, v² 3, vc 2, c² 1, d 1
        assert_eq!(m.len(), 5 + 6 + 3 + 4 + 3 + 2 + 1 + 1);
    }

    #[test]
    fn integer_rounding_recovers_scaled_integers() {
        let p = HomogeneousPoly::from_real_terms(2, 2, &[(&[2, 0], 6.0), (&[1, 1], -15.0), (&[0, 2], 9.0)]).unwrap();
        let noisy = p.scale(C64::from_polar(0.37, 1.1));
        let (ip, err) = round_to_integers(&noisy, &RoundingOptions::default()).unwrap();
        assert_eq!(ip.terms, vec![(vec![2, 0], 2), (vec![1, 1], -5), (vec![0, 2], 3)]);
        assert!(err < 1e-12);
        assert_eq!(ip.to_string(), "2*u1^2 - 5*u1*u2 + 3*u2^2");
    }

}
