//! Theta-constant tables, the linear system for the quartic span, Dubrovin
//! and Hirota quartics, and quadrics/cubics at singular points of Θ.

use crate::linalg::{nullspace_seeded, norm2, ComplexMatrix, C64};
use crate::poly::{monomials, multinomial, GradedPoly, GradedVars, HomogeneousPoly, Poly, PolyError};
use crate::theta::{theta_jet, theta_jet_char, Characteristic, RiemannMatrix, ThetaError, ThetaJet};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

/// Default rank tolerance for the nullspace.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Joint residual of `(θ, ∇θ)` accepted as a singular point.
pub const SINGULAR_GATE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DubrovinError {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("not a singular point of the theta divisor (residual {0:.3e})")]
    NotSingularPoint(f64),
    #[error("table lacks derivative order {0}")]
    MissingOrder(u32),
}

/// Sorted index 4-tuples `i ≤ j ≤ k ≤ l`.
pub type Quad = [usize; 4];

/// Theta constants of one characteristic.
#[derive(Debug, Clone)]
pub struct CharEntry {
    pub eps: Vec<u8>,
    /// `θ̂[ε](0)`.
    pub value0: C64,
    /// `Q[ε]`, the Hessian of `θ̂[ε]` at 0.
    pub hessian: Option<ComplexMatrix>,
    /// Fourth derivatives keyed by sorted index tuples.
    pub fourth: Option<BTreeMap<Quad, C64>>,
}

#[derive(Debug, Clone)]
pub struct ThetaConstantTable {
    pub genus: usize,
    pub entries: Vec<CharEntry>,
    pub abs_tol: f64,
}

/// Wall-clock time spent per derivative order.
#[derive(Debug, Clone, Default)]
pub struct TableTimings {
    pub per_order: BTreeMap<u32, Duration>,
}

impl ThetaConstantTable {
    /// Number of values plus Hessian entries (upper triangle).
    pub fn count_values_and_hessians(&self) -> usize {
        let g = self.genus;
        self.entries
            .iter()
            .map(|e| 1 + if e.hessian.is_some() { g * (g + 1) / 2 } else { 0 })
            .sum()
    }

    pub fn count_fourth(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.fourth.as_ref().map_or(0, BTreeMap::len))
            .sum()
    }

    fn entry(&self, eps: &[u8]) -> &CharEntry {
        self.entries
            .iter()
            .find(|e| e.eps == eps)
            .expect("every characteristic is present")
    }
}

fn quad_of(alpha: &[u32]) -> Quad {
    let mut q = [0; 4];
    let mut p = 0;
    for (i, &a) in alpha.iter().enumerate() {
        for _ in 0..a {
            q[p] = i;
            p += 1;
        }
    }
    q
}

/// All theta constants `θ̂[ε]`, `Q[ε]` and fourth derivatives at 0.
pub fn build_table(tau: &RiemannMatrix, abs_tol: f64) -> Result<ThetaConstantTable, DubrovinError> {
    Ok(build_table_orders(tau, abs_tol, &[0, 2, 4])?.0)
}

/// Builds only the requested derivative orders (a subset of {0, 2, 4}),
/// timing each order separately.
pub fn build_table_orders(
    tau: &RiemannMatrix,
    abs_tol: f64,
    orders: &[u32],
) -> Result<(ThetaConstantTable, TableTimings), DubrovinError> {
    let g = tau.genus();
    let t2 = tau.scaled(2.0);
    let zero = vec![C64::new(0.0, 0.0); g];
    let chars: Vec<Vec<u8>> = (0..1usize << g).map(|k| Characteristic::eps_from_index(g, k)).collect();
    let jets_at = |order: u32| -> Result<Vec<ThetaJet>, ThetaError> {
        chars
            .par_iter()
            .map(|eps| {
                let ch = Characteristic::new(eps.clone(), vec![0; g])?;
                theta_jet_char(&zero, &t2, &ch, order, abs_tol)
            })
            .collect()
    };
    let mut timings = TableTimings::default();
    let mut entries: Vec<CharEntry> = chars
        .iter()
        .map(|eps| CharEntry {
            eps: eps.clone(),
            value0: C64::new(0.0, 0.0),
            hessian: None,
            fourth: None,
        })
        .collect();
    let mut wanted: Vec<u32> = orders.to_vec();
    if !wanted.contains(&0) {
        wanted.push(0);
    }
    wanted.sort();
    wanted.dedup();
    for &order in &wanted {
        let start = Instant::now();
        let jets = jets_at(order)?;
        for (e, jet) in entries.iter_mut().zip(&jets) {
            match order {
                0 => e.value0 = jet.value(),
                2 => {
                    let h = jet.hessian();
                    // Mixed partials come from one multi-index, so h is exactly symmetric.
                    e.hessian = Some(h);
                }
                4 => {
                    let mut m = BTreeMap::new();
                    for alpha in monomials(g, 4) {
                        m.insert(quad_of(&alpha), jet.get(&alpha).expect("order 4 jet"));
                    }
                    e.fourth = Some(m);
                }
                _ => {}
            }
        }
        timings.per_order.insert(order, start.elapsed());
    }
    Ok((
        ThetaConstantTable {
            genus: g,
            entries,
            abs_tol,
        },
        timings,
    ))
}

/// Rows: `Q[ε]_{ij}` for `i ≤ j`, then `θ̂[ε](0)`; columns: ε in binary order.
pub fn lemma_matrix(table: &ThetaConstantTable) -> Result<ComplexMatrix, DubrovinError> {
    let g = table.genus;
    let nrows = g * (g + 1) / 2 + 1;
    let ncols = 1usize << g;
    let mut m = ComplexMatrix::zeros(nrows, ncols);
    for k in 0..ncols {
        let e = table.entry(&Characteristic::eps_from_index(g, k));
        let h = e.hessian.as_ref().ok_or(DubrovinError::MissingOrder(2))?;
        let mut r = 0;
        for i in 0..g {
            for j in i..g {
                m[(r, k)] = h[(i, j)];
                r += 1;
            }
        }
        m[(r, k)] = e.value0;
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct RecoveryOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Shuffles the SVD sweep order; `None` is the canonical order.
    pub nullspace_seed: Option<u64>,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            abs_tol: crate::theta::DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            nullspace_seed: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub quartics: Vec<HomogeneousPoly>,
    pub lambda_basis: Vec<Vec<C64>>,
    pub expected_dim: usize,
    pub singular_values: Vec<f64>,
    /// Set when the nullspace dimension differs from `expected_dim`.
    pub dimension_mismatch: bool,
    pub table: ThetaConstantTable,
}

impl RecoveryResult {
    pub fn nullspace_dim(&self) -> usize {
        self.lambda_basis.len()
    }
}

/// `2^g − g(g+1)/2 − 1`, saturating at 0.
pub fn expected_dim(g: usize) -> usize {
    (1usize << g).saturating_sub(g * (g + 1) / 2 + 1)
}

/// The quartic form `Σ_ε λ_ε ∂⁴_U θ̂[ε](0)` in `U`.
pub fn quartic_from_lambda(table: &ThetaConstantTable, lambda: &[C64]) -> Result<HomogeneousPoly, DubrovinError> {
    let g = table.genus;
    let mut terms = Vec::new();
    for alpha in monomials(g, 4) {
        let q = quad_of(&alpha);
        let mut s = C64::new(0.0, 0.0);
        for (k, &l) in lambda.iter().enumerate() {
            let e = table.entry(&Characteristic::eps_from_index(g, k));
            let f = e.fourth.as_ref().ok_or(DubrovinError::MissingOrder(4))?;
            s += l * f[&q];
        }
        terms.push((alpha.clone(), s * multinomial(&alpha)));
    }
    Ok(HomogeneousPoly::from_terms(g, 4, terms)?)
}

/// Builds the table, solves for the λ-space and assembles normalized quartics.
pub fn recover_quartics(tau: &RiemannMatrix, opts: &RecoveryOptions) -> Result<RecoveryResult, DubrovinError> {
    let table = build_table(tau, opts.abs_tol)?;
    recover_from_table(table, opts)
}

pub fn recover_from_table(table: ThetaConstantTable, opts: &RecoveryOptions) -> Result<RecoveryResult, DubrovinError> {
    let g = table.genus;
    let m = lemma_matrix(&table)?;
    let ns = nullspace_seeded(&m, opts.rel_tol, opts.nullspace_seed);
    let mut quartics = Vec::with_capacity(ns.dim());
    for lambda in &ns.basis {
        let q = quartic_from_lambda(&table, lambda)?;
        quartics.push(q.normalize()?);
    }
    let expected = expected_dim(g);
    Ok(RecoveryResult {
        dimension_mismatch: ns.dim() != expected,
        quartics,
        lambda_basis: ns.basis,
        expected_dim: expected,
        singular_values: ns.singular_values,
        table,
    })
}

/// Weighted quartic `F[ε]` in `(U, V, W, c, d)`.
pub fn dubrovin_quartic(table: &ThetaConstantTable, eps: &[u8]) -> Result<GradedPoly, DubrovinError> {
    let g = table.genus;
    let vars = GradedVars { genus: g };
    let n = vars.nvars();
    let e = table.entry(eps);
    let h = e.hessian.as_ref().ok_or(DubrovinError::MissingOrder(2))?;
    let f4 = e.fourth.as_ref().ok_or(DubrovinError::MissingOrder(4))?;
    let mut terms: Vec<(Vec<u32>, C64)> = Vec::new();
    let mono = |pairs: &[usize]| {
        let mut x = vec![0u32; n];
        for &p in pairs {
            x[p] += 1;
        }
        x
    };
    for alpha in monomials(g, 4) {
        let mut x = alpha.clone();
        x.resize(n, 0);
        terms.push((x, f4[&quad_of(&alpha)] * multinomial(&alpha)));
    }
    for i in 0..g {
        for j in 0..g {
            // −UᵀQW
            terms.push((mono(&[vars.u(i), vars.w(j)]), -h[(i, j)]));
            // (3/2)c·UᵀQU and (3/4)VᵀQV, each ordered pair once
            terms.push((mono(&[vars.c(), vars.u(i), vars.u(j)]), h[(i, j)] * 1.5));
            terms.push((mono(&[vars.v(i), vars.v(j)]), h[(i, j)] * 0.75));
        }
    }
    terms.push((mono(&[vars.d()]), e.value0));
    let p = Poly::from_terms(n, terms)?;
    Ok(GradedPoly::from_poly(g, &p))
}

/// Forms `Σ_{|α|=k} (k!/α!) ∂^αθ · x^α` over a block of variables.
fn jet_form(jet: &ThetaJet, order: u32, offset: usize, n: usize) -> Poly {
    let g = jet.genus();
    let terms = monomials(g, order).into_iter().map(|alpha| {
        let c = jet.get(&alpha).expect("order within jet") * multinomial(&alpha);
        let mut x = vec![0u32; n];
        x[offset..offset + g].copy_from_slice(&alpha);
        (x, c)
    });
    Poly::from_terms(n, terms).expect("lengths agree")
}

/// `Σ_{i,j} ∂_i∂_jθ · x_i y_j` for two different variable blocks.
fn mixed_form(jet: &ThetaJet, off_a: usize, off_b: usize, n: usize) -> Poly {
    let g = jet.genus();
    let mut terms = Vec::new();
    for i in 0..g {
        for j in 0..g {
            let mut x = vec![0u32; n];
            x[off_a + i] += 1;
            x[off_b + j] += 1;
            terms.push((x, jet.partial(&[i, j])));
        }
    }
    Poly::from_terms(n, terms).expect("lengths agree")
}

/// The Hirota quartic `H_z` assembled from a jet of order ≥ 4.
pub fn hirota_from_jet(jet: &ThetaJet) -> GradedPoly {
    let g = jet.genus();
    let vars = GradedVars { genus: g };
    let n = vars.nvars();
    let k = |x: f64| Poly::constant(n, C64::new(x, 0.0));
    let th = Poly::constant(n, jet.value());
    let u1 = jet_form(jet, 1, vars.u(0), n);
    let u2 = jet_form(jet, 2, vars.u(0), n);
    let u3 = jet_form(jet, 3, vars.u(0), n);
    let u4 = jet_form(jet, 4, vars.u(0), n);
    let w1 = jet_form(jet, 1, vars.w(0), n);
    let v1 = jet_form(jet, 1, vars.v(0), n);
    let v2 = jet_form(jet, 2, vars.v(0), n);
    let uw = mixed_form(jet, vars.u(0), vars.w(0), n);
    let mut cvar = vec![0u32; n];
    cvar[vars.c()] = 1;
    let c = Poly::from_terms(n, [(cvar, C64::new(1.0, 0.0))]).expect("length");
    let mut dvar = vec![0u32; n];
    dvar[vars.d()] = 1;
    let d = Poly::from_terms(n, [(dvar, C64::new(1.0, 0.0))]).expect("length");

    let kdv = u4
        .mul(&th)
        .add(&u3.mul(&u1).scale(C64::new(-4.0, 0.0)))
        .add(&u2.mul(&u2).scale(C64::new(3.0, 0.0)));
    let uw_part = u1.mul(&w1).add(&th.mul(&uw).scale(C64::new(-1.0, 0.0))).mul(&k(4.0));
    let c_part = c.mul(&u2.mul(&th).add(&u1.mul(&u1).scale(C64::new(-1.0, 0.0)))).mul(&k(6.0));
    let v_part = th.mul(&v2).add(&v1.mul(&v1).scale(C64::new(-1.0, 0.0))).mul(&k(3.0));
    let d_part = d.mul(&th).mul(&th).mul(&k(8.0));
    let total = kdv.add(&uw_part).add(&c_part).add(&v_part).add(&d_part);
    GradedPoly::from_poly(g, &total)
}

/// `H_z` at the point `z`.
pub fn hirota_quartic(z: &[C64], tau: &RiemannMatrix, abs_tol: f64) -> Result<GradedPoly, DubrovinError> {
    let jet = theta_jet(z, tau, 4, abs_tol)?;
    Ok(hirota_from_jet(&jet))
}

/// `‖(θ, ∇θ)‖` at `z`, divided by the natural scale `exp(π yᵀY⁻¹y)` of θ.
pub fn singular_residual(jet: &ThetaJet) -> f64 {
    let g = jet.genus();
    let mut s = jet.partial_normalized(&[]).norm_sqr();
    for i in 0..g {
        s += jet.partial_normalized(&[i]).norm_sqr();
    }
    s.sqrt()
}

fn singular_jet(z0: &[C64], tau: &RiemannMatrix, order: u32, abs_tol: f64) -> Result<ThetaJet, DubrovinError> {
    let jet = theta_jet(z0, tau, order, abs_tol)?;
    let r = singular_residual(&jet);
    if !(r <= SINGULAR_GATE) {
        return Err(DubrovinError::NotSingularPoint(r));
    }
    Ok(jet)
}

fn form_from_jet(jet: &ThetaJet, order: u32) -> Result<HomogeneousPoly, DubrovinError> {
    let g = jet.genus();
    let terms = monomials(g, order).into_iter().map(|alpha| {
        let c = jet.get(&alpha).expect("order within jet") * multinomial(&alpha);
        (alpha, c)
    });
    Ok(HomogeneousPoly::from_terms(g, order, terms)?)
}

/// The quadric `∂²_Uθ(z₀) = UᵀHU`.
pub fn quadric_from_singular(z0: &[C64], tau: &RiemannMatrix, abs_tol: f64) -> Result<HomogeneousPoly, DubrovinError> {
    form_from_jet(&singular_jet(z0, tau, 2, abs_tol)?, 2)
}

/// The cubic `∂³_Uθ(z₀)`.
pub fn cubic_from_singular(z0: &[C64], tau: &RiemannMatrix, abs_tol: f64) -> Result<HomogeneousPoly, DubrovinError> {
    form_from_jet(&singular_jet(z0, tau, 3, abs_tol)?, 3)
}

/// `max |p(x)| / (‖p‖·‖x‖^deg)` over all polynomials and points.
pub fn membership_residual(polys: &[HomogeneousPoly], points: &[Vec<C64>]) -> Result<f64, DubrovinError> {
    let mut worst: f64 = 0.0;
    for p in polys {
        let pn = p.coeff_norm();
        if pn == 0.0 {
            continue;
        }
        for x in points {
            let v = p.evaluate(x)?;
            let scale = pn * norm2(x).powi(p.degree() as i32);
            worst = worst.max(v.norm() / scale);
        }
    }
    Ok(worst)
}
