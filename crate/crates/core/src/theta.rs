//! Riemann theta functions with characteristics and their derivatives.
//!
//! Sums are taken over the lattice points inside an ellipsoid
//! `‖T(n + shift)‖ ≤ R`, where `TᵀT = π·Im τ`. The radius comes from a
//! packing argument: balls of radius `ρ/2` around the shifted lattice points
//! are disjoint (`ρ` is the shortest lattice vector), which turns the tail of
//! the sum into a one-dimensional Gaussian integral.

use crate::linalg::{cholesky_pd, svd, ComplexMatrix, KahanC, LinalgError, C64};
use crate::poly::monomials;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Largest supported derivative order.
pub const MAX_ORDER: u32 = 4;
/// Default absolute truncation tolerance.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Default radius cap.
pub const RADIUS_CAP: f64 = 30.0;
/// Default lattice size cap.
pub const POINT_CAP: usize = 100_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThetaError {
    #[error("τ is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("Im τ is not positive definite: {0}")]
    NotPositiveDefinite(LinalgError),
    #[error("τ must be square and nonempty")]
    BadShape,
    #[error("truncation radius {0:.2} exceeds the cap")]
    TargetUnreachable(f64),
    #[error("lattice enumeration exceeds {0} points")]
    Overflow(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("derivative order {0} exceeds the supported maximum")]
    OrderExceeded(u32),
    #[error("characteristic entries must be 0 or 1")]
    InvalidCharacteristic,
    #[error("abs_tol must be at least 1e-14")]
    ToleranceTooSmall,
}

/// A validated Riemann matrix with its lattice data cached.
#[derive(Debug, Clone)]
pub struct RiemannMatrix {
    tau: ComplexMatrix,
    /// Im τ, row-major.
    y: Vec<f64>,
    /// (Im τ)⁻¹, row-major.
    y_inv: Vec<f64>,
    /// Upper-triangular `T` with `TᵀT = π·Im τ`, row-major.
    t: Vec<f64>,
    /// Operator norm of `T⁻¹`.
    t_inv_norm: f64,
    /// Length of the shortest nonzero vector of `Tℤ^g`.
    shortest: f64,
}

impl RiemannMatrix {
    pub fn new(tau: ComplexMatrix) -> Result<Self, ThetaError> {
        let g = tau.rows();
        if g == 0 || !tau.is_square() {
            return Err(ThetaError::BadShape);
        }
        let maxabs = tau.max_abs();
        let mut asym: f64 = 0.0;
        for i in 0..g {
            for j in 0..g {
                asym = asym.max((tau[(i, j)] - tau[(j, i)]).norm());
            }
        }
        if asym > 1e-10 * (1.0 + maxabs) {
            return Err(ThetaError::NotSymmetric(asym));
        }
        // Symmetrize exactly so downstream quadratic forms are consistent.
        let tau = ComplexMatrix::from_fn(g, g, |i, j| (tau[(i, j)] + tau[(j, i)]) * 0.5);
        let im = tau.imag_part();
        let l = cholesky_pd(&im, 1e-14).map_err(ThetaError::NotPositiveDefinite)?;
        let y: Vec<f64> = im.entries().iter().map(|z| z.re).collect();
        let y_inv: Vec<f64> = im
            .inverse()
            .map_err(ThetaError::NotPositiveDefinite)?
            .entries()
            .iter()
            .map(|z| z.re)
            .collect();
        let sp = PI.sqrt();
        let mut t = vec![0.0; g * g];
        for i in 0..g {
            for j in i..g {
                t[i * g + j] = sp * l[(j, i)].re;
            }
        }
        let tm = ComplexMatrix::from_fn(g, g, |i, j| C64::new(t[i * g + j], 0.0));
        let s = svd(&tm);
        let smin = *s.singular_values.last().expect("g ≥ 1");
        let mut rm = RiemannMatrix {
            tau,
            y,
            y_inv,
            t,
            t_inv_norm: 1.0 / smin,
            shortest: 0.0,
        };
        rm.shortest = rm.shortest_vector();
        Ok(rm)
    }

    pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self, ThetaError> {
        let m = ComplexMatrix::from_re_im(re, im).map_err(|_| ThetaError::BadShape)?;
        Self::new(m)
    }

    pub fn genus(&self) -> usize {
        self.tau.rows()
    }

    pub fn tau(&self) -> &ComplexMatrix {
        &self.tau
    }

    /// Im τ, row-major.
    pub fn im_part(&self) -> &[f64] {
        &self.y
    }

    /// (Im τ)⁻¹, row-major.
    pub fn im_inverse(&self) -> &[f64] {
        &self.y_inv
    }

    /// The matrix `k·τ`.
    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.tau.scale(C64::new(k, 0.0))).expect("positive multiple of a Riemann matrix")
    }

    /// Length of the shortest nonzero vector of the lattice `Tℤ^g`.
    pub fn shortest_lattice_vector(&self) -> f64 {
        self.shortest
    }

    fn shortest_vector(&self) -> f64 {
        let g = self.genus();
        let r0 = (0..g)
            .map(|j| (0..g).map(|i| self.t[i * g + j].powi(2)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        let mut best = r0;
        let zero = vec![0.0; g];
        self.enumerate(r0 * (1.0 + 1e-12), &zero, POINT_CAP, |n| {
            if n.iter().any(|&k| k != 0) {
                best = best.min(self.t_norm(n, &zero));
            }
        })
        .expect("a ball through a basis vector is small");
        best
    }

    /// `‖T(n + shift)‖`.
    fn t_norm(&self, n: &[i64], shift: &[f64]) -> f64 {
        let g = self.genus();
        let mut s = 0.0;
        for i in 0..g {
            let mut r = 0.0;
            for j in i..g {
                r += self.t[i * g + j] * (n[j] as f64 + shift[j]);
            }
            s += r * r;
        }
        s.sqrt()
    }

    /// Calls `f` on every `n` with `‖T(n + shift)‖ ≤ radius`.
    fn enumerate(
        &self,
        radius: f64,
        shift: &[f64],
        cap: usize,
        mut f: impl FnMut(&[i64]),
    ) -> Result<usize, ThetaError> {
        let g = self.genus();
        let mut n = vec![0i64; g];
        let mut count = 0usize;
        self.enum_level(g, radius * radius, shift, &mut n, &mut count, cap, &mut f)?;
        Ok(count)
    }

    #[allow(clippy::too_many_arguments)]
    fn enum_level(
        &self,
        level: usize,
        r2: f64,
        shift: &[f64],
        n: &mut [i64],
        count: &mut usize,
        cap: usize,
        f: &mut impl FnMut(&[i64]),
    ) -> Result<(), ThetaError> {
        if level == 0 {
            *count += 1;
            if *count > cap {
                return Err(ThetaError::Overflow(cap));
            }
            f(n);
            return Ok(());
        }
        let g = self.genus();
        let i = level - 1;
        let tii = self.t[i * g + i];
        let mut center = 0.0;
        for j in level..g {
            center += self.t[i * g + j] * (n[j] as f64 + shift[j]);
        }
        // (tii·(n_i + s_i) + center)² ≤ r2
        let half = r2.max(0.0).sqrt() / tii;
        let mid = -center / tii - shift[i];
        let lo = (mid - half).ceil() as i64;
        let hi = (mid + half).floor() as i64;
        for k in lo..=hi {
            n[i] = k;
            let r = tii * (k as f64 + shift[i]) + center;
            let rest = r2 - r * r;
            if rest < 0.0 {
                continue;
            }
            self.enum_level(level - 1, rest, shift, n, count, cap, f)?;
        }
        n[i] = 0;
        Ok(())
    }
}

/// A theta characteristic `[ε; δ]` with entries in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Characteristic {
    pub eps: Vec<u8>,
    pub delta: Vec<u8>,
}

impl Characteristic {
    pub fn new(eps: Vec<u8>, delta: Vec<u8>) -> Result<Self, ThetaError> {
        if eps.len() != delta.len() {
            return Err(ThetaError::DimensionMismatch {
                expected: eps.len(),
                got: delta.len(),
            });
        }
        if eps.iter().chain(&delta).any(|&x| x > 1) {
            return Err(ThetaError::InvalidCharacteristic);
        }
        Ok(Characteristic { eps, delta })
    }

    pub fn zero(g: usize) -> Self {
        Characteristic {
            eps: vec![0; g],
            delta: vec![0; g],
        }
    }

    /// The `k`-th vector of `{0,1}^g` in binary order, first coordinate most
    /// significant.
    pub fn eps_from_index(g: usize, k: usize) -> Vec<u8> {
        (0..g).map(|i| ((k >> (g - 1 - i)) & 1) as u8).collect()
    }
}

/// A derivative multi-index with `|α| ≤ 4`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DerivOrder {
    pub alpha: Vec<u32>,
}

impl DerivOrder {
    pub fn new(alpha: Vec<u32>) -> Result<Self, ThetaError> {
        let k: u32 = alpha.iter().sum();
        if k > MAX_ORDER {
            return Err(ThetaError::OrderExceeded(k));
        }
        Ok(DerivOrder { alpha })
    }

    pub fn zero(g: usize) -> Self {
        DerivOrder { alpha: vec![0; g] }
    }

    /// The multi-index of `∂_{i₁}⋯∂_{i_k}`.
    pub fn from_indices(g: usize, idx: &[usize]) -> Result<Self, ThetaError> {
        let mut alpha = vec![0; g];
        for &i in idx {
            alpha[i] += 1;
        }
        Self::new(alpha)
    }

    pub fn order(&self) -> u32 {
        self.alpha.iter().sum()
    }
}

/// Arguments of a single theta evaluation.
#[derive(Debug, Clone)]
pub struct ThetaRequest<'a> {
    pub z: Vec<C64>,
    pub tau: &'a RiemannMatrix,
    pub char: Characteristic,
    pub deriv: DerivOrder,
    pub abs_tol: f64,
}

/// Upper bound on `Σ_{‖T(n+c)‖>R} |Π(2π m_j)^{α_j}| e^{−‖T(n+c)‖²}` for
/// `|α| = order`, where `m = n + c − w` and `‖w‖ ≤ shift_norm`.
fn tail_bound(g: usize, rho: f64, kappa: f64, shift_norm: f64, order: u32, r: f64) -> f64 {
    let a = r - rho;
    if a <= (order as f64 / 2.0).sqrt() || a <= 0.0 {
        return f64::INFINITY;
    }
    // (2π)^N (κu + s)^N (u + ρ/2)^{g−1} expanded in powers of u.
    let n = order as usize;
    let mut poly = vec![0.0; n + g];
    let mut p1 = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; p1.len() + 1];
        for (k, &c) in p1.iter().enumerate() {
            next[k] += c * shift_norm * 2.0 * PI;
            next[k + 1] += c * kappa * 2.0 * PI;
        }
        p1 = next;
    }
    let mut p2 = vec![1.0];
    for _ in 0..g - 1 {
        let mut next = vec![0.0; p2.len() + 1];
        for (k, &c) in p2.iter().enumerate() {
            next[k] += c * rho / 2.0;
            next[k + 1] += c;
        }
        p2 = next;
    }
    for (i, &x) in p1.iter().enumerate() {
        for (j, &y) in p2.iter().enumerate() {
            poly[i + j] += x * y;
        }
    }
    // ∫_a^∞ u^k e^{−u²} du = Γ((k+1)/2, a²)/2, with Γ(1/2, x) ≤ x^{−1/2}e^{−x}
    // and the upward recursion Γ(s+1, x) = sΓ(s, x) + x^s e^{−x}.
    let x = a * a;
    let ex = (-x).exp();
    let mut gam_half = ex / x.sqrt(); // Γ(1/2, x) bound
    let mut gam_int = ex; // Γ(1, x)
    let mut integral = 0.0;
    for (k, &c) in poly.iter().enumerate() {
        let s2 = k + 1; // 2s
        let gam = if s2 % 2 == 1 { gam_half } else { gam_int };
        integral += c * gam / 2.0;
        if s2 % 2 == 1 {
            let s = s2 as f64 / 2.0;
            gam_half = s * gam_half + x.powf(s) * ex;
        } else {
            let s = s2 as f64 / 2.0;
            gam_int = s * gam_int + x.powf(s) * ex;
        }
    }
    g as f64 * (2.0 / rho).powi(g as i32) * integral
}

fn radius_for(tau: &RiemannMatrix, tol: f64, max_order: u32, shift_norm: f64, cap: f64) -> Result<f64, ThetaError> {
    let g = tau.genus();
    let kappa = tau.t_inv_norm;
    // Any packing radius up to ρ/2 gives a valid bound; small ones help when
    // the lattice is very sparse, so take the best of a few.
    let rhos: Vec<f64> = [1.0, 0.5, 0.25, 0.125]
        .iter()
        .map(|f| f * tau.shortest)
        .chain([2.0, 1.0, 0.5].into_iter().filter(|&r| r < tau.shortest))
        .collect();
    let mut radius: f64 = 0.0;
    for order in 0..=max_order {
        let ok = |r: f64| {
            rhos.iter()
                .any(|&rho| tail_bound(g, rho, kappa, shift_norm, order, r) <= tol)
        };
        if !ok(cap) {
            return Err(ThetaError::TargetUnreachable(cap));
        }
        let (mut lo, mut hi) = (0.0, cap);
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        radius = radius.max(hi);
    }
    Ok(radius)
}

/// Radius `R` such that lattice terms with `‖T(n + c)‖ > R` contribute at most
/// `abs_tol` in total, for every derivative of order `≤ max_order`.
pub fn truncation_radius(tau: &RiemannMatrix, abs_tol: f64, max_order: u32) -> Result<f64, ThetaError> {
    if max_order > MAX_ORDER {
        return Err(ThetaError::OrderExceeded(max_order));
    }
    truncation_radius_capped(tau, abs_tol, max_order, RADIUS_CAP)
}

/// As [`truncation_radius`] with an explicit cap on `R`.
pub fn truncation_radius_capped(tau: &RiemannMatrix, abs_tol: f64, max_order: u32, cap: f64) -> Result<f64, ThetaError> {
    if max_order > MAX_ORDER {
        return Err(ThetaError::OrderExceeded(max_order));
    }
    radius_for(tau, abs_tol, max_order, 0.0, cap)
}

/// All `n ∈ ℤ^g` with `‖T(n + shift)‖ ≤ radius`.
pub fn lattice_points(tau: &RiemannMatrix, radius: f64, shift: &[f64]) -> Result<Vec<Vec<i64>>, ThetaError> {
    lattice_points_capped(tau, radius, shift, POINT_CAP)
}

pub fn lattice_points_capped(
    tau: &RiemannMatrix,
    radius: f64,
    shift: &[f64],
    cap: usize,
) -> Result<Vec<Vec<i64>>, ThetaError> {
    if shift.len() != tau.genus() {
        return Err(ThetaError::DimensionMismatch {
            expected: tau.genus(),
            got: shift.len(),
        });
    }
    let mut out = Vec::new();
    tau.enumerate(radius, shift, cap, |n| out.push(n.to_vec()))?;
    Ok(out)
}

/// Index of multi-indices `|α| ≤ max_order` in graded-lex order.
#[derive(Debug, Clone)]
pub struct JetIndex {
    genus: usize,
    max_order: u32,
    alphas: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl JetIndex {
    pub fn new(genus: usize, max_order: u32) -> Self {
        let alphas: Vec<Vec<u32>> = (0..=max_order).flat_map(|k| monomials(genus, k)).collect();
        let lookup = alphas.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        JetIndex {
            genus,
            max_order,
            alphas,
            lookup,
        }
    }

    pub fn alphas(&self) -> &[Vec<u32>] {
        &self.alphas
    }

    pub fn position(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

/// All partial derivatives `∂^α θ[ε;δ](z|τ)` with `|α| ≤ max_order`.
///
/// Values are stored divided by `exp(log_scale)`, the natural size
/// `exp(π yᵀY⁻¹y)` of θ at `z = x + iy`, so that they stay O(1) anywhere on
/// ℂ^g.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    index: JetIndex,
    values: Vec<C64>,
    log_scale: f64,
}

impl ThetaJet {
    pub fn genus(&self) -> usize {
        self.index.genus
    }

    pub fn max_order(&self) -> u32 {
        self.index.max_order
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn alphas(&self) -> &[Vec<u32>] {
        self.index.alphas()
    }

    /// `∂^α θ` at the evaluation point.
    pub fn get(&self, alpha: &[u32]) -> Option<C64> {
        self.get_normalized(alpha).map(|v| v * self.log_scale.exp())
    }

    /// `∂^α θ · exp(−log_scale)`.
    pub fn get_normalized(&self, alpha: &[u32]) -> Option<C64> {
        self.index.position(alpha).map(|i| self.values[i])
    }

    /// `∂_{i₁}⋯∂_{i_k} θ`.
    pub fn partial(&self, idx: &[usize]) -> C64 {
        self.partial_normalized(idx) * self.log_scale.exp()
    }

    pub fn partial_normalized(&self, idx: &[usize]) -> C64 {
        let mut alpha = vec![0; self.genus()];
        for &i in idx {
            alpha[i] += 1;
        }
        self.get_normalized(&alpha).expect("order within jet")
    }

    pub fn value(&self) -> C64 {
        self.partial(&[])
    }

    pub fn gradient(&self) -> Vec<C64> {
        (0..self.genus()).map(|i| self.partial(&[i])).collect()
    }

    pub fn hessian(&self) -> ComplexMatrix {
        let g = self.genus();
        ComplexMatrix::from_fn(g, g, |i, j| self.partial(&[i, j]))
    }

    /// Rescales the stored values to the given `log_scale`.
    pub fn with_log_scale(mut self, log_scale: f64) -> Self {
        let f = (self.log_scale - log_scale).exp();
        for v in &mut self.values {
            *v *= f;
        }
        self.log_scale = log_scale;
        self
    }
}

/// Core lattice pass shared by every public evaluator.
fn jet_impl(
    z: &[C64],
    tau: &RiemannMatrix,
    char: &Characteristic,
    max_order: u32,
    abs_tol: f64,
) -> Result<ThetaJet, ThetaError> {
    let g = tau.genus();
    if z.len() != g {
        return Err(ThetaError::DimensionMismatch {
            expected: g,
            got: z.len(),
        });
    }
    if char.eps.len() != g || char.delta.len() != g {
        return Err(ThetaError::DimensionMismatch {
            expected: g,
            got: char.eps.len(),
        });
    }
    if max_order > MAX_ORDER {
        return Err(ThetaError::OrderExceeded(max_order));
    }
    if abs_tol < 1e-14 {
        return Err(ThetaError::ToleranceTooSmall);
    }
    // w = Y⁻¹ Im z centers the Gaussian; log_scale = π wᵀ Y w.
    let yz: Vec<f64> = z.iter().map(|x| x.im).collect();
    let w: Vec<f64> = (0..g)
        .map(|i| (0..g).map(|j| tau.y_inv[i * g + j] * yz[j]).sum())
        .collect();
    let log_scale = PI * (0..g).map(|i| w[i] * yz[i]).sum::<f64>();
    let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = radius_for(tau, abs_tol, max_order, wnorm, RADIUS_CAP)?;
    let c: Vec<f64> = char.eps.iter().map(|&e| e as f64 / 2.0).collect();
    let shift: Vec<f64> = c.iter().zip(&w).map(|(a, b)| a + b).collect();
    let zd: Vec<C64> = z
        .iter()
        .zip(&char.delta)
        .map(|(x, &d)| x + d as f64 / 2.0)
        .collect();
    let index = JetIndex::new(g, max_order);
    let nalpha = index.alphas.len();
    let mut acc = vec![KahanC::default(); nalpha];
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let k = max_order as usize;
    let mut m = vec![0.0; g];
    let mut pw = vec![vec![C64::new(1.0, 0.0); k + 1]; g];
    tau.enumerate(radius, &shift, POINT_CAP, |n| {
        for i in 0..g {
            m[i] = n[i] as f64 + c[i];
        }
        // πi mᵀτm + 2πi mᵀ(z + δ/2) − log_scale
        let mut quad = C64::new(0.0, 0.0);
        for i in 0..g {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..g {
                row += tau.tau[(i, j)] * m[j];
            }
            quad += row * m[i];
        }
        let lin: C64 = (0..g).map(|i| zd[i] * m[i]).sum();
        let e = C64::new(0.0, PI) * quad + two_pi_i * lin - log_scale;
        let term = e.exp();
        for i in 0..g {
            let v = two_pi_i * m[i];
            for p in 1..=k {
                pw[i][p] = pw[i][p - 1] * v;
            }
        }
        for (slot, alpha) in acc.iter_mut().zip(&index.alphas) {
            let mut t = term;
            for (i, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    t *= pw[i][a as usize];
                }
            }
            slot.add(t);
        }
    })?;
    Ok(ThetaJet {
        index,
        values: acc.iter().map(KahanC::total).collect(),
        log_scale,
    })
}

/// `∂^α θ[ε;δ](z|τ)`.
pub fn theta_eval(req: &ThetaRequest) -> Result<C64, ThetaError> {
    let k = req.deriv.order();
    let jet = jet_impl(&req.z, req.tau, &req.char, k, req.abs_tol)?;
    Ok(jet.get(&req.deriv.alpha).expect("order within jet"))
}

/// All derivatives of θ(z|τ) up to `max_order` from one lattice pass.
pub fn theta_jet(z: &[C64], tau: &RiemannMatrix, max_order: u32, abs_tol: f64) -> Result<ThetaJet, ThetaError> {
    jet_impl(z, tau, &Characteristic::zero(tau.genus()), max_order, abs_tol)
}

/// As [`theta_jet`] for a general characteristic.
pub fn theta_jet_char(
    z: &[C64],
    tau: &RiemannMatrix,
    char: &Characteristic,
    max_order: u32,
    abs_tol: f64,
) -> Result<ThetaJet, ThetaError> {
    jet_impl(z, tau, char, max_order, abs_tol)
}

/// `∂^α θ̂[ε](0) = ∂^α θ[ε;0](0|2τ)`.
pub fn theta_hat(tau: &RiemannMatrix, eps: &[u8], deriv: &DerivOrder, abs_tol: f64) -> Result<C64, ThetaError> {
    let g = tau.genus();
    let t2 = tau.scaled(2.0);
    theta_eval(&ThetaRequest {
        z: vec![C64::new(0.0, 0.0); g],
        tau: &t2,
        char: Characteristic::new(eps.to_vec(), vec![0; g])?,
        deriv: deriv.clone(),
        abs_tol,
    })
}

/// Contracts the symmetric derivative tensors of a jet with direction
/// vectors, e.g. `[(U, 2), (W, 1)]` gives `∂_U² ∂_W θ`.
pub fn directional(jet: &ThetaJet, dirs: &[(&[C64], usize)]) -> Result<C64, ThetaError> {
    directional_normalized(jet, dirs).map(|v| v * jet.log_scale.exp())
}

pub fn directional_normalized(jet: &ThetaJet, dirs: &[(&[C64], usize)]) -> Result<C64, ThetaError> {
    let g = jet.genus();
    let mut vecs: Vec<&[C64]> = Vec::new();
    for (v, mult) in dirs {
        if v.len() != g {
            return Err(ThetaError::DimensionMismatch {
                expected: g,
                got: v.len(),
            });
        }
        for _ in 0..*mult {
            vecs.push(v);
        }
    }
    let k = vecs.len();
    if k as u32 > jet.max_order() {
        return Err(ThetaError::OrderExceeded(k as u32));
    }
    let mut idx = vec![0usize; k];
    let mut total = KahanC::default();
    let mut alpha = vec![0u32; g];
    loop {
        let mut coef = C64::new(1.0, 0.0);
        alpha.iter_mut().for_each(|a| *a = 0);
        for (slot, &i) in idx.iter().enumerate() {
            coef *= vecs[slot][i];
            alpha[i] += 1;
        }
        if coef != C64::new(0.0, 0.0) {
            total.add(coef * jet.get_normalized(&alpha).expect("order within jet"));
        }
        // odometer
        let mut p = 0;
        loop {
            if p == k {
                return Ok(total.total());
            }
            idx[p] += 1;
            if idx[p] < g {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}
