//! Levenberg–Marquardt, homotopy continuation, witness counts and quadric
//! extraction.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::dubrovin::singular_residual;
use crate::linalg::{lstsq, norm2, nullspace, solve_real, ComplexMatrix, LinalgError, Lu, C64};
use crate::poly::{monomials, proportional, HomogeneousPoly, Poly, PolyError};
use crate::theta::{theta_jet, RiemannMatrix, ThetaError, DEFAULT_ABS_TOL};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("Levenberg-Marquardt made no progress (residual {residual:e} after {iters} iterations)")]
    NoProgress { x: Vec<f64>, residual: f64, iters: usize },
    #[error("singular points of the theta divisor need genus >= 4, got {0}")]
    GenusTooSmall(usize),
    #[error("restart budget exhausted; best residual {best_residual:e}")]
    BudgetExhausted { best_residual: f64, best_z: Vec<C64> },
    #[error("{paths} paths exceed the cap of {cap}")]
    TooManyPaths { paths: u128, cap: u128 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

type Callback<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a>;

/// A real residual map `ℝ^dim_in → ℝ^dim_out` with an optional Jacobian.
///
/// The Jacobian callback returns a row-major `dim_out × dim_in` matrix.
/// Without one, forward differences with step `1e-7·max(1, |x_j|)` are used.
pub struct ResidualMap<'a> {
    pub dim_in: usize,
    pub dim_out: usize,
    eval: Callback<'a>,
    jac: Option<Callback<'a>>,
}

impl<'a> ResidualMap<'a> {
    pub fn new(dim_in: usize, dim_out: usize, eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a) -> Self {
        ResidualMap {
            dim_in,
            dim_out,
            eval: Box::new(eval),
            jac: None,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a) -> Self {
        self.jac = Some(Box::new(jac));
        self
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let r = (self.eval)(x);
        assert_eq!(r.len(), self.dim_out, "residual length");
        r
    }

    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        if let Some(j) = &self.jac {
            let j = j(x);
            assert_eq!(j.len(), self.dim_out * self.dim_in, "jacobian shape");
            return j;
        }
        let r0 = self.eval(x);
        let mut j = vec![0.0; self.dim_out * self.dim_in];
        let mut xp = x.to_vec();
        for c in 0..self.dim_in {
            let h = 1e-7 * x[c].abs().max(1.0);
            xp[c] = x[c] + h;
            let r = self.eval(&xp);
            xp[c] = x[c];
            for row in 0..self.dim_out {
                j[row * self.dim_in + c] = (r[row] - r0[row]) / h;
            }
        }
        j
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 200,
            tol: 1e-10,
            lambda0: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iters: usize,
    pub converged: bool,
    /// `‖F‖` at the start and after every accepted step.
    pub history: Vec<f64>,
}

const STALL_REL: f64 = 1e-14;
const STALL_COUNT: usize = 20;

/// Minimizes `‖F(x)‖₂` from `x0` with Marquardt-scaled damping.
pub fn levenberg_marquardt(f: &ResidualMap, x0: &[f64], opts: &LmOptions) -> Result<LmResult, SolveError> {
    if x0.len() != f.dim_in {
        return Err(SolveError::DimensionMismatch(format!("x0 has {} entries, map expects {}", x0.len(), f.dim_in)));
    }
    let (n, m) = (f.dim_in, f.dim_out);
    let mut x = x0.to_vec();
    let mut r = f.eval(&x);
    let mut fx = norm(&r);
    if !fx.is_finite() {
        return Err(SolveError::NoProgress { x, residual: fx, iters: 0 });
    }
    let mut history = vec![fx];
    let mut lambda = opts.lambda0;
    let mut stall = 0;
    let mut jac: Option<Vec<f64>> = None;
    for it in 0..opts.max_iter {
        if fx <= opts.tol {
            return Ok(LmResult { x, residual: fx, iters: it, converged: true, history });
        }
        let j = jac.get_or_insert_with(|| f.jacobian(&x));
        let mut a = vec![0.0; n * n];
        let mut g = vec![0.0; n];
        for row in 0..m {
            let jr = &j[row * n..(row + 1) * n];
            for p in 0..n {
                g[p] += jr[p] * r[row];
                for q in p..n {
                    a[p * n + q] += jr[p] * jr[q];
                }
            }
        }
        for p in 0..n {
            for q in 0..p {
                a[p * n + q] = a[q * n + p];
            }
        }
        let dmax = (0..n).map(|p| a[p * n + p]).fold(0.0, f64::max);
        let floor = (dmax * 1e-12).max(f64::MIN_POSITIVE);
        for p in 0..n {
            a[p * n + p] += lambda * a[p * n + p].max(floor);
        }
        let step = solve_real(a, g.iter().map(|v| -v).collect()).ok();
        let trial = step.map(|d| {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
            let rn = f.eval(&xn);
            let fn_ = norm(&rn);
            (xn, rn, fn_)
        });
        match trial {
            Some((xn, rn, fn_)) if fn_.is_finite() && fn_ < fx => {
                let rel = (fx - fn_) / fx;
                x = xn;
                r = rn;
                fx = fn_;
                jac = None;
                history.push(fx);
                lambda = (lambda / 10.0).max(1e-20);
                stall = if rel < STALL_REL { stall + 1 } else { 0 };
            }
            _ => {
                lambda *= 10.0;
                stall += 1;
            }
        }
        if stall >= STALL_COUNT {
            return Err(SolveError::NoProgress { x, residual: fx, iters: it + 1 });
        }
    }
    let converged = fx <= opts.tol;
    Ok(LmResult { x, residual: fx, iters: opts.max_iter, converged, history })
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_c(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

// ---------------------------------------------------------------------------
// Singular points of the theta divisor

#[derive(Debug, Clone, Copy)]
pub struct SingularOptions {
    pub tol: f64,
    pub budget: usize,
    pub max_iter: usize,
    pub abs_tol: f64,
    pub lambda0: f64,
}

impl Default for SingularOptions {
    fn default() -> Self {
        SingularOptions {
            tol: 1e-10,
            budget: 50,
            max_iter: 100,
            abs_tol: DEFAULT_ABS_TOL,
            lambda0: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SingularPoint {
    pub z: Vec<C64>,
    /// `‖(θ, ∇θ)‖` at `z`, normalized as in [`singular_residual`].
    pub residual: f64,
    /// Index of the successful restart, counting from zero.
    pub restart: usize,
    pub iters: usize,
}

fn z_from_ab(tau: &RiemannMatrix, a: &[f64], b: &[f64]) -> Vec<C64> {
    let t = tau.tau();
    let g = a.len();
    (0..g)
        .map(|i| C64::new(a[i], 0.0) + (0..g).map(|j| t[(i, j)] * b[j]).sum::<C64>())
        .collect()
}

/// Weight on the gradient rows of [`singular_system`]. Each derivative brings
/// a factor `2πi·m`, so this puts θ and ∇θ on the same footing; with weight 1
/// most random starts stall in spurious local minima.
pub const GRADIENT_WEIGHT: f64 = 1.0 / (2.0 * PI);

/// The residual map `(a, b) ↦ (θ, ∇θ/2π)(a + τb)·exp(−π bᵀYb)`, split into
/// real and imaginary parts.
pub fn singular_system<'a>(tau: &'a RiemannMatrix, abs_tol: f64) -> ResidualMap<'a> {
    let gw = GRADIENT_WEIGHT;
    let g = tau.genus();
    let eval = move |x: &[f64]| {
        let z = z_from_ab(tau, &x[..g], &x[g..]);
        let mut out = vec![f64::NAN; 2 * (g + 1)];
        if let Ok(jet) = theta_jet(&z, tau, 1, abs_tol) {
            for k in 0..=g {
                let v = if k == 0 { jet.partial_normalized(&[]) } else { jet.partial_normalized(&[k - 1]) * gw };
                out[2 * k] = v.re;
                out[2 * k + 1] = v.im;
            }
        }
        out
    };
    let jac = move |x: &[f64]| {
        let (a, b) = (&x[..g], &x[g..]);
        let z = z_from_ab(tau, a, b);
        let n = 2 * g;
        let mut j = vec![f64::NAN; 2 * (g + 1) * n];
        let Ok(jet) = theta_jet(&z, tau, 2, abs_tol) else {
            return j;
        };
        let y = tau.im_part();
        let yb: Vec<f64> = (0..g).map(|i| (0..g).map(|k| y[i * g + k] * b[k]).sum()).collect();
        let t = tau.tau();
        for k in 0..=g {
            let base: Vec<usize> = if k == 0 { vec![] } else { vec![k - 1] };
            let fk = jet.partial_normalized(&base);
            let grad: Vec<C64> = (0..g)
                .map(|l| {
                    let mut idx = base.clone();
                    idx.push(l);
                    jet.partial_normalized(&idx)
                })
                .collect();
            let w = if k == 0 { 1.0 } else { gw };
            for c in 0..g {
                let da = grad[c] * w;
                let db = ((0..g).map(|l| t[(l, c)] * grad[l]).sum::<C64>() - fk * (2.0 * PI * yb[c])) * w;
                j[(2 * k) * n + c] = da.re;
                j[(2 * k + 1) * n + c] = da.im;
                j[(2 * k) * n + g + c] = db.re;
                j[(2 * k + 1) * n + g + c] = db.im;
            }
        }
        j
    };
    ResidualMap::new(2 * g, 2 * (g + 1), eval).with_jacobian(jac)
}

/// Searches for `z₀` with `θ(z₀) = ∇θ(z₀) = 0` from random `z = a + τb`,
/// `a, b ∈ [0,1)^g`.
///
/// Restart `k` draws its start from stream `k` of a ChaCha8 generator seeded
/// with `seed`. Restarts run in parallel batches and the lowest successful
/// index wins, so the answer does not depend on the thread count.
pub fn find_singular_point(tau: &RiemannMatrix, seed: u64, opts: &SingularOptions) -> Result<SingularPoint, SolveError> {
    let g = tau.genus();
    if g < 4 {
        return Err(SolveError::GenusTooSmall(g));
    }
    let map = singular_system(tau, opts.abs_tol);
    // The weighted norm bounds GRADIENT_WEIGHT times the plain one from above.
    let lm = LmOptions {
        max_iter: opts.max_iter,
        tol: opts.tol * GRADIENT_WEIGHT,
        lambda0: opts.lambda0,
    };
    let batch = rayon::current_num_threads().max(1);
    let mut best = (f64::INFINITY, Vec::new());
    let mut start = 0;
    while start < opts.budget {
        let end = (start + batch).min(opts.budget);
        let runs: Vec<(usize, f64, Vec<f64>, usize)> = (start..end)
            .into_par_iter()
            .map(|k| {
                let mut rng = rng_for(seed, k as u64);
                let x0: Vec<f64> = (0..2 * g).map(|_| rng.random::<f64>()).collect();
                match levenberg_marquardt(&map, &x0, &lm) {
                    Ok(r) => (k, r.residual, r.x, r.iters),
                    Err(SolveError::NoProgress { x, residual, iters }) => (k, residual, x, iters),
                    Err(_) => (k, f64::INFINITY, x0, 0),
                }
            })
            .collect();
        for (k, _, x, iters) in runs {
            let z = z_from_ab(tau, &x[..g], &x[g..]);
            let res = theta_jet(&z, tau, 1, opts.abs_tol).map_or(f64::INFINITY, |j| singular_residual(&j));
            if res <= opts.tol {
                return Ok(SingularPoint {
                    residual: res,
                    z,
                    restart: k,
                    iters,
                });
            }
            if res < best.0 {
                best = (res, z);
            }
        }
        start = end;
    }
    Err(SolveError::BudgetExhausted {
        best_residual: best.0,
        best_z: best.1,
    })
}

/// Coordinates `(a, b)` with `z = a + τb`.
pub fn lattice_coordinates(z: &[C64], tau: &RiemannMatrix) -> (Vec<f64>, Vec<f64>) {
    let g = tau.genus();
    let yi = tau.im_inverse();
    let b: Vec<f64> = (0..g).map(|i| (0..g).map(|j| yi[i * g + j] * z[j].im).sum()).collect();
    let t = tau.tau();
    let a: Vec<f64> = (0..g).map(|i| z[i].re - (0..g).map(|j| t[(i, j)].re * b[j]).sum::<f64>()).collect();
    (a, b)
}

/// Whether `z₁ ≡ ±z₂` modulo `ℤ^g + τℤ^g`, with lattice coordinates within
/// `tol` of integers.
pub fn equivalent_mod_lattice(z1: &[C64], z2: &[C64], tau: &RiemannMatrix, tol: f64) -> bool {
    [1.0, -1.0].iter().any(|&s| {
        let d: Vec<C64> = z1.iter().zip(z2).map(|(a, b)| a - b * s).collect();
        let (a, b) = lattice_coordinates(&d, tau);
        a.iter().chain(&b).all(|v| (v - v.round()).abs() <= tol)
    })
}

// ---------------------------------------------------------------------------
// Homotopy continuation

#[derive(Debug, Clone, Copy)]
pub struct HomotopyOptions {
    /// Endpoint acceptance: normalized residual of the target system.
    pub tol: f64,
    /// Relative distance below which two endpoints are identified.
    pub dedup: f64,
    pub max_paths: u128,
    pub divergence: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        HomotopyOptions {
            tol: 1e-8,
            dedup: 1e-6,
            max_paths: 100_000,
            divergence: 1e8,
            max_step: 0.1,
            min_step: 1e-14,
            max_steps: 100_000,
            seed: 0x7e11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathStatus {
    Tracking,
    Converged,
    Diverged,
    SingularEndpoint,
}

#[derive(Debug, Clone)]
pub struct PathPoint {
    pub t: f64,
    pub x: Vec<C64>,
    pub status: PathStatus,
    /// Normalized residual of the target system at `x`.
    pub residual: f64,
}

struct Compiled {
    terms: Vec<(Vec<u32>, C64)>,
}

impl Compiled {
    fn new(p: &Poly) -> Self {
        Compiled {
            terms: p.terms().map(|(e, c)| (e.to_vec(), c)).collect(),
        }
    }

    fn eval(&self, x: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powu(k) }))
            .sum()
    }
}

struct System {
    f: Vec<Compiled>,
    df: Vec<Vec<Compiled>>,
    deg: Vec<u32>,
    scale: Vec<f64>,
}

impl System {
    fn new(polys: &[Poly]) -> Self {
        let n = polys.first().map_or(0, Poly::nvars);
        System {
            f: polys.iter().map(Compiled::new).collect(),
            df: polys.iter().map(|p| (0..n).map(|i| Compiled::new(&p.derivative(i))).collect()).collect(),
            deg: polys.iter().map(Poly::total_degree).collect(),
            scale: polys.iter().map(Poly::coeff_norm).collect(),
        }
    }

    fn eval(&self, x: &[C64]) -> Vec<C64> {
        self.f.iter().map(|p| p.eval(x)).collect()
    }

    fn jac(&self, x: &[C64]) -> ComplexMatrix {
        let n = x.len();
        ComplexMatrix::from_fn(self.f.len(), n, |i, j| self.df[i][j].eval(x))
    }

    fn residual(&self, x: &[C64]) -> f64 {
        let nx = norm2(x).max(1.0);
        self.eval(x)
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm() / (self.scale[i] * nx.powi(self.deg[i] as i32)))
            .fold(0.0, f64::max)
    }
}

struct Homotopy<'a> {
    target: &'a System,
    gamma0: C64,
    gammas: Vec<C64>,
}

impl Homotopy<'_> {
    fn start(&self, x: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let g: Vec<C64> = (0..x.len()).map(|i| x[i].powu(self.target.deg[i]) - self.gammas[i]).collect();
        let dg: Vec<C64> = (0..x.len())
            .map(|i| {
                let d = self.target.deg[i];
                x[i].powu(d - 1) * d as f64
            })
            .collect();
        (g, dg)
    }

    fn h(&self, x: &[C64], t: f64) -> Vec<C64> {
        let f = self.target.eval(x);
        let (g, _) = self.start(x);
        f.iter().zip(&g).map(|(f, g)| self.gamma0 * g * (1.0 - t) + f * t).collect()
    }

    fn hx(&self, x: &[C64], t: f64) -> ComplexMatrix {
        let mut j = self.target.jac(x).scale(C64::new(t, 0.0));
        let (_, dg) = self.start(x);
        for i in 0..x.len() {
            j[(i, i)] += self.gamma0 * dg[i] * (1.0 - t);
        }
        j
    }

    fn ht(&self, x: &[C64]) -> Vec<C64> {
        let f = self.target.eval(x);
        let (g, _) = self.start(x);
        f.iter().zip(&g).map(|(f, g)| f - self.gamma0 * g).collect()
    }

    /// Newton at fixed `t`. A step is trusted only if the corrections shrink
    /// at least fourfold per iteration, which keeps the corrector inside the
    /// basin of the path being followed.
    fn correct(&self, x: &mut [C64], t: f64) -> bool {
        let mut prev = f64::INFINITY;
        for _ in 0..4 {
            let Ok(lu) = Lu::new(&self.hx(x, t)) else {
                return false;
            };
            let h = self.h(x, t);
            let dx = lu.solve(&h);
            let nd = norm2(&dx);
            let floor = 1e-13 * (1.0 + norm2(x));
            if !nd.is_finite() || (prev < f64::INFINITY && nd > 0.25 * prev && nd > floor) {
                return false;
            }
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi -= d;
            }
            if nd <= 1e-11 * (1.0 + norm2(x)) {
                return true;
            }
            prev = nd;
        }
        false
    }

    fn track(&self, mut x: Vec<C64>, opts: &HomotopyOptions) -> PathPoint {
        let mut t = 0.0;
        let mut h: f64 = 0.01_f64.min(opts.max_step);
        let mut streak = 0;
        let mut status = PathStatus::Tracking;
        for _ in 0..opts.max_steps {
            if t >= 1.0 {
                break;
            }
            h = h.min(1.0 - t);
            let ok = (|| {
                let lu = Lu::new(&self.hx(&x, t)).ok()?;
                let ht = self.ht(&x);
                let v = lu.solve(&ht);
                let mut x1: Vec<C64> = x.iter().zip(&v).map(|(a, b)| a - b * h).collect();
                let t1 = if 1.0 - t - h < 1e-15 { 1.0 } else { t + h };
                self.correct(&mut x1, t1).then_some((x1, t1))
            })();
            match ok {
                Some((x1, t1)) => {
                    x = x1;
                    t = t1;
                    streak += 1;
                    if streak >= 3 {
                        h = (2.0 * h).min(opts.max_step);
                        streak = 0;
                    }
                }
                None => {
                    h /= 2.0;
                    streak = 0;
                    if h < opts.min_step {
                        status = PathStatus::SingularEndpoint;
                        break;
                    }
                }
            }
            if norm2(&x) > opts.divergence {
                status = PathStatus::Diverged;
                break;
            }
        }
        if status == PathStatus::Tracking && t >= 1.0 {
            self.refine(&mut x);
            let residual = self.target.residual(&x);
            status = if residual <= opts.tol { PathStatus::Converged } else { PathStatus::SingularEndpoint };
            return PathPoint { t, x, status, residual };
        }
        let residual = self.target.residual(&x);
        PathPoint { t, x, status, residual }
    }

    /// Newton on the target system alone.
    fn refine(&self, x: &mut [C64]) {
        let mut prev = f64::INFINITY;
        for _ in 0..20 {
            let Ok(lu) = Lu::new(&self.target.jac(x)) else {
                return;
            };
            let dx = lu.solve(&self.target.eval(x));
            let nd = norm2(&dx);
            if !nd.is_finite() || nd >= prev {
                return;
            }
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi -= d;
            }
            if nd <= 1e-15 * (1.0 + norm2(x)) {
                return;
            }
            prev = nd;
        }
    }
}

fn path_count(deg: &[u32]) -> u128 {
    deg.iter().map(|&d| d as u128).product()
}

/// Tracks every path of the total-degree homotopy
/// `γ₀(1−t)·(x_i^{d_i} − γ_i) + t·F` and reports each endpoint.
pub fn track_paths(polys: &[Poly], opts: &HomotopyOptions) -> Result<Vec<PathPoint>, SolveError> {
    let n = polys.len();
    if n == 0 || polys.iter().any(|p| p.nvars() != n) {
        return Err(SolveError::DimensionMismatch("need a square system".into()));
    }
    let target = System::new(polys);
    if target.deg.iter().any(|&d| d == 0) {
        return Err(SolveError::DimensionMismatch("every polynomial needs degree >= 1".into()));
    }
    let paths = path_count(&target.deg);
    if paths > opts.max_paths {
        return Err(SolveError::TooManyPaths { paths, cap: opts.max_paths });
    }
    let mut rng = rng_for(opts.seed, 0);
    let unit = |rng: &mut ChaCha8Rng| {
        let z = gaussian_c(rng);
        z / z.norm()
    };
    let gamma0 = unit(&mut rng);
    let gammas: Vec<C64> = (0..n).map(|_| unit(&mut rng)).collect();
    let hom = Homotopy { target: &target, gamma0, gammas };
    let roots: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let d = target.deg[i];
            let r = hom.gammas[i].powf(1.0 / d as f64);
            (0..d).map(|k| r * C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)).collect()
        })
        .collect();
    let starts: Vec<Vec<C64>> = (0..paths as usize)
        .map(|mut idx| {
            (0..n)
                .map(|i| {
                    let d = target.deg[i] as usize;
                    let r = roots[i][idx % d];
                    idx /= d;
                    r
                })
                .collect()
        })
        .collect();
    let mut out: Vec<PathPoint> = starts.par_iter().map(|x0| hom.track(x0.clone(), opts)).collect();
    // Two paths meeting at one endpoint usually means one jumped onto the
    // other; re-track both with smaller steps.
    let mut o = *opts;
    for _ in 0..3 {
        let clash = clashing(&out, opts.dedup);
        if clash.is_empty() {
            break;
        }
        o.max_step /= 8.0;
        let redo: Vec<(usize, PathPoint)> = clash.par_iter().map(|&i| (i, hom.track(starts[i].clone(), &o))).collect();
        for (i, p) in redo {
            out[i] = p;
        }
    }
    Ok(out)
}

/// Indices of converged paths whose endpoints coincide with another's.
fn clashing(ends: &[PathPoint], rel: f64) -> Vec<usize> {
    let mut hit = vec![false; ends.len()];
    for i in 0..ends.len() {
        if ends[i].status != PathStatus::Converged {
            continue;
        }
        for j in i + 1..ends.len() {
            if ends[j].status != PathStatus::Converged {
                continue;
            }
            let d: Vec<C64> = ends[i].x.iter().zip(&ends[j].x).map(|(a, b)| a - b).collect();
            if norm2(&d) <= rel * norm2(&ends[i].x).max(1.0) {
                hit[i] = true;
                hit[j] = true;
            }
        }
    }
    (0..ends.len()).filter(|&i| hit[i]).collect()
}

fn lex_cmp(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

fn dedup_points(mut pts: Vec<Vec<C64>>, rel: f64) -> Vec<Vec<C64>> {
    pts.sort_by(|a, b| lex_cmp(a, b));
    let mut out: Vec<Vec<C64>> = Vec::new();
    for p in pts {
        let np = norm2(&p).max(1.0);
        let dup = out.iter().any(|q| {
            let d: Vec<C64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
            norm2(&d) <= rel * np
        });
        if !dup {
            out.push(p);
        }
    }
    out
}

/// Isolated solutions of a square polynomial system, sorted lexicographically
/// and deduplicated.
pub fn solve_square_system(polys: &[Poly], opts: &HomotopyOptions) -> Result<Vec<Vec<C64>>, SolveError> {
    let ends = track_paths(polys, opts)?;
    let good = ends.into_iter().filter(|p| p.status == PathStatus::Converged).map(|p| p.x).collect();
    Ok(dedup_points(good, opts.dedup))
}

// ---------------------------------------------------------------------------
// Witness points

#[derive(Debug, Clone, serde::Serialize)]
pub struct WitnessReport {
    pub count: usize,
    /// Accepted projective points, scaled to unit norm.
    pub points: Vec<Vec<C64>>,
    pub paths_tracked: usize,
    /// Paths that did not converge to a finite endpoint.
    pub failures: usize,
    /// Largest membership residual among accepted points (0 when none).
    pub residual_max: f64,
    /// Smallest membership residual among rejected endpoints, if any.
    pub min_rejected_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessOptions {
    /// Acceptance gate on `|p(u)| / (‖p‖·‖u‖^deg)` for every input polynomial.
    pub tol: f64,
    pub homotopy: HomotopyOptions,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            tol: 1e-8,
            homotopy: HomotopyOptions::default(),
        }
    }
}

fn relative_value(p: &HomogeneousPoly, u: &[C64]) -> Result<f64, PolyError> {
    Ok(p.evaluate(u)?.norm() / (p.coeff_norm() * norm2(u).powi(p.degree() as i32)))
}

/// Counts points of `V(quartics)` on a random hyperplane of `ℙ^{g−1}`.
///
/// The hyperplane `L·u = 0` and the chart `h·u = 1` are parametrized as
/// `u = p₀ + Σ t_j q_j` with `q_j` spanning `ker[L; h]`; the restricted
/// polynomials are combined into a square system in `t` by random complex
/// weights, and each endpoint is kept only if every input polynomial vanishes
/// there to `opts.tol`.
pub fn witness_count(polys: &[HomogeneousPoly], seed: u64, opts: &WitnessOptions) -> Result<WitnessReport, SolveError> {
    let Some(first) = polys.first() else {
        return Err(SolveError::DimensionMismatch("no polynomials".into()));
    };
    let g = first.nvars();
    if g < 3 {
        return Err(SolveError::DimensionMismatch(format!("need at least 3 variables, got {g}")));
    }
    if polys.iter().any(|p| p.nvars() != g) {
        return Err(SolveError::DimensionMismatch("polynomials disagree on nvars".into()));
    }
    let mut rng = rng_for(seed, 1);
    let l: Vec<C64> = (0..g).map(|_| gaussian_c(&mut rng)).collect();
    let h: Vec<C64> = (0..g).map(|_| gaussian_c(&mut rng)).collect();
    let m = ComplexMatrix::from_rows(&[l, h])?;
    let (p0, _) = lstsq(&m, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    let ker = nullspace(&m, 1e-12);
    let k = g - 2;
    if ker.dim() != k {
        return Err(SolveError::DimensionMismatch("degenerate random hyperplane".into()));
    }
    let param = ComplexMatrix::from_fn(g, k + 1, |i, j| if j == 0 { p0[i] } else { ker.basis[j - 1][i] });
    let restricted: Vec<Poly> = polys
        .iter()
        .map(|p| {
            let q = p.as_poly().compose_linear(&param)?;
            let s = 1.0 / q.coeff_norm().max(f64::MIN_POSITIVE);
            Poly::from_terms(k, q.terms().map(|(e, c)| (e[1..].to_vec(), c * s)))
        })
        .collect::<Result<_, _>>()?;
    let system: Vec<Poly> = (0..k)
        .map(|_| {
            restricted
                .iter()
                .fold(Poly::zero(k), |acc, p| acc.add(&p.scale(gaussian_c(&mut rng))))
        })
        .collect();
    let hopts = HomotopyOptions {
        seed: seed ^ 0x9e37_79b9_7f4a_7c15,
        ..opts.homotopy
    };
    let ends = track_paths(&system, &hopts)?;
    let paths_tracked = ends.len();
    let failures = ends.iter().filter(|p| p.status != PathStatus::Converged).count();
    let chart: Vec<Vec<C64>> = dedup_points(
        ends.into_iter().filter(|p| p.status == PathStatus::Converged).map(|p| p.x).collect(),
        hopts.dedup,
    );
    let mut points = Vec::new();
    let mut residual_max: f64 = 0.0;
    let mut min_rejected: Option<f64> = None;
    for t in chart {
        let mut ts = vec![C64::new(1.0, 0.0)];
        ts.extend(t);
        let u = param.matvec(&ts);
        let mut worst: f64 = 0.0;
        for p in polys {
            worst = worst.max(relative_value(p, &u)?);
        }
        if worst <= opts.tol {
            residual_max = residual_max.max(worst);
            let n = norm2(&u);
            points.push(u.iter().map(|v| v / n).collect());
        } else {
            min_rejected = Some(min_rejected.map_or(worst, |m: f64| m.min(worst)));
        }
    }
    Ok(WitnessReport {
        count: points.len(),
        points,
        paths_tracked,
        failures,
        residual_max,
        min_rejected_residual: min_rejected,
    })
}

// ---------------------------------------------------------------------------
// Quadrics whose square lies in a span of quartics

#[derive(Debug, Clone, Copy)]
pub struct QuadricOptions {
    pub tol: f64,
    pub seed: u64,
    pub lm: LmOptions,
}

impl Default for QuadricOptions {
    fn default() -> Self {
        QuadricOptions {
            tol: 1e-9,
            seed: 0x0dd5,
            lm: LmOptions {
                max_iter: 300,
                tol: 1e-9,
                lambda0: 1e-3,
            },
        }
    }
}

/// Quadrics `Q` with `Q² ∈ span(quartics)`, up to scale, found by
/// Levenberg–Marquardt from `attempts` random starts.
pub fn extract_quadrics(
    quartics: &[HomogeneousPoly],
    attempts: usize,
    opts: &QuadricOptions,
) -> Result<Vec<HomogeneousPoly>, SolveError> {
    let Some(first) = quartics.first() else {
        return Ok(Vec::new());
    };
    let g = first.nvars();
    if quartics.iter().any(|q| q.nvars() != g || q.degree() != 4) {
        return Err(SolveError::DimensionMismatch("expected quartics in a common set of variables".into()));
    }
    let m2 = monomials(g, 2);
    let m4 = monomials(g, 4);
    let pos4: HashMap<Vec<u32>, usize> = m4.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let mut pairs = Vec::new();
    for a in 0..m2.len() {
        for b in a..m2.len() {
            let e: Vec<u32> = m2[a].iter().zip(&m2[b]).map(|(x, y)| x + y).collect();
            pairs.push((a, b, pos4[&e], if a == b { 1.0 } else { 2.0 }));
        }
    }
    let cols: Vec<Vec<C64>> = quartics
        .iter()
        .map(|q| {
            let v = q.coeff_vector();
            let n = norm2(&v);
            v.iter().map(|c| c / n).collect()
        })
        .collect();
    let k = quartics.len();
    let nq = m2.len();
    let nu = k + nq;
    let nr = m4.len() + 1;
    let mut rng = rng_for(opts.seed, 2);
    let r: Vec<C64> = (0..k).map(|_| gaussian_c(&mut rng)).collect();

    let split = |x: &[f64]| -> Vec<C64> { (0..nu).map(|i| C64::new(x[i], x[nu + i])).collect() };
    let residual = |u: &[C64]| -> Vec<C64> {
        let (lam, q) = u.split_at(k);
        let mut out = vec![C64::new(0.0, 0.0); nr];
        for (i, col) in cols.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(col) {
                *o += lam[i] * c;
            }
        }
        for &(a, b, m, mult) in &pairs {
            out[m] -= q[a] * q[b] * mult;
        }
        out[nr - 1] = lam.iter().zip(&r).map(|(l, r)| l * r).sum::<C64>() - 1.0;
        out
    };
    let eval = |x: &[f64]| -> Vec<f64> {
        let c = residual(&split(x));
        c.iter().map(|v| v.re).chain(c.iter().map(|v| v.im)).collect()
    };
    let jac = |x: &[f64]| -> Vec<f64> {
        let u = split(x);
        let q = &u[k..];
        let mut jc = vec![C64::new(0.0, 0.0); nr * nu];
        for (i, col) in cols.iter().enumerate() {
            for (m, c) in col.iter().enumerate() {
                jc[m * nu + i] = *c;
            }
            jc[(nr - 1) * nu + i] = r[i];
        }
        for &(a, b, m, mult) in &pairs {
            jc[m * nu + k + a] -= q[b] * mult;
            jc[m * nu + k + b] -= q[a] * mult;
        }
        let n = 2 * nu;
        let mut j = vec![0.0; 2 * nr * n];
        for row in 0..nr {
            for c in 0..nu {
                let v = jc[row * nu + c];
                j[row * n + c] = v.re;
                j[row * n + nu + c] = -v.im;
                j[(nr + row) * n + c] = v.im;
                j[(nr + row) * n + nu + c] = v.re;
            }
        }
        j
    };
    let map = ResidualMap::new(2 * nu, 2 * nr, eval).with_jacobian(jac);
    let lm = LmOptions { tol: opts.tol, ..opts.lm };
    let found: Vec<Option<Vec<C64>>> = (0..attempts)
        .into_par_iter()
        .map(|a| {
            let mut rng = rng_for(opts.seed, 1000 + a as u64);
            let x0: Vec<f64> = (0..2 * nu).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let res = levenberg_marquardt(&map, &x0, &lm).ok().filter(|r| r.residual <= opts.tol)?;
            // Components that enter only squared (u₂² in (u₁u₂)², say) sit at
            // double roots and are left at √tol; run on to the noise floor.
            let polish = LmOptions { tol: 0.0, max_iter: 200, ..lm };
            let x = match levenberg_marquardt(&map, &res.x, &polish) {
                Ok(r) => r.x,
                Err(SolveError::NoProgress { x, .. }) => x,
                Err(_) => res.x,
            };
            Some(split(&x)[k..].to_vec())
        })
        .collect();
    let mut out: Vec<HomogeneousPoly> = Vec::new();
    for q in found.into_iter().flatten() {
        if norm2(&q) == 0.0 {
            continue;
        }
        let poly = HomogeneousPoly::from_terms(g, 2, m2.iter().cloned().zip(q))?.normalize()?;
        let mut dup = false;
        for o in &out {
            if proportional(&poly, o, 1e-6)?.proportional {
                dup = true;
                break;
            }
        }
        if !dup {
            out.push(poly);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

/// Default imaginary-part scale for [`random_riemann_matrix`].
pub fn default_random_scale(g: usize) -> f64 {
    1.0 / g as f64
}

/// `Re τ` symmetric with uniform(−½, ½) entries and
/// `Im τ = scale·(BᵀB + g·I)` with standard normal `B`.
pub fn random_riemann_matrix(g: usize, seed: u64, scale: f64) -> RiemannMatrix {
    assert!(g >= 1 && scale > 0.0);
    let mut rng = rng_for(seed, 3);
    let mut re = vec![vec![0.0; g]; g];
    for i in 0..g {
        for j in i..g {
            let v = rng.random::<f64>() - 0.5;
            re[i][j] = v;
            re[j][i] = v;
        }
    }
    let b: Vec<Vec<f64>> = (0..g).map(|_| (0..g).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let mut im = vec![vec![0.0; g]; g];
    for i in 0..g {
        for j in i..g {
            let mut s: f64 = (0..g).map(|k| b[k][i] * b[k][j]).sum();
            if i == j {
                s += g as f64;
            }
            im[i][j] = scale * s;
            im[j][i] = scale * s;
        }
    }
    RiemannMatrix::from_re_im(&re, &im).expect("BᵀB + gI is positive definite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lm_sqrt2() {
        let f = ResidualMap::new(1, 1, |x: &[f64]| vec![x[0] * x[0] - 2.0]);
        let r = levenberg_marquardt(&f, &[1.0], &LmOptions::default()).unwrap();
        assert!((r.x[0] - 2f64.sqrt()).abs() < 1e-10);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn lm_rejects_wrong_length() {
        let f = ResidualMap::new(2, 1, |x: &[f64]| vec![x[0]]);
        assert!(matches!(
            levenberg_marquardt(&f, &[1.0], &LmOptions::default()),
            Err(SolveError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn lm_reports_stagnation() {
        // |F| = 1 everywhere: no step can ever be accepted.
        let f = ResidualMap::new(1, 2, |x: &[f64]| vec![x[0].cos(), x[0].sin()]);
        assert!(matches!(
            levenberg_marquardt(&f, &[0.3], &LmOptions::default()),
            Err(SolveError::NoProgress { .. })
        ));
    }

    #[test]
    fn univariate_roots() {
        let p = Poly::from_terms(1, vec![(vec![2], C64::new(1.0, 0.0)), (vec![0], C64::new(-1.0, 0.0))]).unwrap();
        let sols = solve_square_system(&[p], &HomotopyOptions::default()).unwrap();
        assert_eq!(sols.len(), 2);
        assert!((sols[0][0] + 1.0).norm() < 1e-10 && (sols[1][0] - 1.0).norm() < 1e-10);
    }

    #[test]
    fn path_cap() {
        let p = Poly::from_terms(1, vec![(vec![7], C64::new(1.0, 0.0)), (vec![0], C64::new(-1.0, 0.0))]).unwrap();
        let opts = HomotopyOptions { max_paths: 5, ..Default::default() };
        assert!(matches!(solve_square_system(&[p], &opts), Err(SolveError::TooManyPaths { paths: 7, cap: 5 })));
    }

    #[test]
    fn random_tau_is_valid_and_seeded() {
        let a = random_riemann_matrix(4, 1, 0.25);
        let b = random_riemann_matrix(4, 2, 0.25);
        let t = a.tau();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(t[(i, j)], t[(j, i)]);
            }
        }
        assert!(t.sub(b.tau()).max_abs() > 1e-3);
        assert_eq!(random_riemann_matrix(4, 1, 0.25).tau(), a.tau());
    }

    #[test]
    fn lattice_equivalence() {
        let tau = random_riemann_matrix(3, 5, 1.0 / 3.0);
        let z = vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.05), C64::new(0.4, -0.1)];
        let n = [1.0, -2.0, 0.0];
        let m = [0.0, 1.0, 3.0];
        let shifted: Vec<C64> = (0..3)
            .map(|i| -z[i] + n[i] + (0..3).map(|j| tau.tau()[(i, j)] * m[j]).sum::<C64>())
            .collect();
        assert!(equivalent_mod_lattice(&z, &shifted, &tau, 1e-9));
        let other: Vec<C64> = z.iter().map(|v| v + 0.25).collect();
        assert!(!equivalent_mod_lattice(&z, &other, &tau, 1e-9));
    }
}
