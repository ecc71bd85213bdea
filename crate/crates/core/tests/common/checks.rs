//! Measurements shared by the property suites and the acceptance report.
//! Each returns the worst observed error so callers can both assert and print.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use torelli::dubrovin::{
    build_table, dubrovin_quartic, hirota_quartic, recover_from_table, RecoveryOptions,
};
use torelli::linalg::{norm2, span_residual, ComplexMatrix};
use torelli::poly::{GradedPoly, HomogeneousPoly, Poly};
use torelli::solve::{levenberg_marquardt, random_riemann_matrix, solve_square_system, HomotopyOptions, LmOptions, ResidualMap};
use torelli::theta::{theta_eval, theta_jet_char, Characteristic, DerivOrder, RiemannMatrix, ThetaRequest};

pub const TOL: f64 = 1e-13;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tau(rng: &mut ChaCha8Rng) -> RiemannMatrix {
    let g = rng.random_range(1..=3);
    random_riemann_matrix(g, rng.random(), 1.0 / g as f64)
}

pub fn random_z(rng: &mut ChaCha8Rng, g: usize) -> Vec<C64> {
    (0..g)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-0.4..0.4)))
        .collect()
}

pub fn random_char(rng: &mut ChaCha8Rng, g: usize) -> Characteristic {
    let bits = |rng: &mut ChaCha8Rng| (0..g).map(|_| rng.random_range(0..2u8)).collect::<Vec<_>>();
    let e = bits(rng);
    Characteristic::new(e, bits(rng)).unwrap()
}

fn theta(z: &[C64], tau: &RiemannMatrix, ch: &Characteristic) -> C64 {
    theta_eval(&ThetaRequest {
        z: z.to_vec(),
        tau,
        char: ch.clone(),
        deriv: DerivOrder::zero(tau.genus()),
        abs_tol: TOL,
    })
    .unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Worst relative error of `θ(z + n + τm) = e(−πi mᵀτm − 2πi mᵀz) θ(z)`.
pub fn quasi_periodicity(draws: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let tau = random_tau(&mut rng);
        let g = tau.genus();
        let z = random_z(&mut rng, g);
        let n: Vec<f64> = (0..g).map(|_| rng.random_range(-1..=1) as f64).collect();
        let m: Vec<f64> = (0..g).map(|_| rng.random_range(-1..=1) as f64).collect();
        let t = tau.tau();
        let tm: Vec<C64> = (0..g).map(|i| (0..g).map(|j| t[(i, j)] * m[j]).sum()).collect();
        let shifted: Vec<C64> = (0..g).map(|i| z[i] + n[i] + tm[i]).collect();
        let mtm: C64 = (0..g).map(|i| tm[i] * m[i]).sum();
        let mz: C64 = (0..g).map(|i| z[i] * m[i]).sum();
        let factor = (C64::new(0.0, -PI) * mtm - C64::new(0.0, 2.0 * PI) * mz).exp();
        let zero = Characteristic::zero(g);
        worst = worst.max(rel(theta(&shifted, &tau, &zero), factor * theta(&z, &tau, &zero)));
    }
    worst
}

/// Worst relative error of `θ[ε;δ](−z) = (−1)^{ε·δ} θ[ε;δ](z)`.
pub fn evenness(draws: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let tau = random_tau(&mut rng);
        let g = tau.genus();
        let z = random_z(&mut rng, g);
        let ch = random_char(&mut rng, g);
        let parity: u32 = ch.eps.iter().zip(&ch.delta).map(|(&a, &b)| (a * b) as u32).sum();
        let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
        let neg: Vec<C64> = z.iter().map(|v| -v).collect();
        let rhs = theta(&z, &tau, &ch) * sign;
        worst = worst.max(rel(theta(&neg, &tau, &ch), rhs));
    }
    worst
}

/// Worst relative error of `θ[ε;δ](z + e_j) = (−1)^{ε_j} θ[ε;δ](z)`.
pub fn periodicity(draws: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let tau = random_tau(&mut rng);
        let g = tau.genus();
        let z = random_z(&mut rng, g);
        let ch = random_char(&mut rng, g);
        let j = rng.random_range(0..g);
        let mut zj = z.clone();
        zj[j] += 1.0;
        let sign = if ch.eps[j] == 1 { -1.0 } else { 1.0 };
        worst = worst.max(rel(theta(&zj, &tau, &ch), theta(&z, &tau, &ch) * sign));
    }
    worst
}

/// Worst error of order-`k` jet entries against central differences of the
/// order-`(k−1)` entries, relative to the norm of the whole jet. Differencing
/// loses about `ε·|θ|/h`, so a gradient far below `|θ|` (large `Im τ`) cannot
/// be measured relative to itself.
pub fn finite_difference(order: u32, draws: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let h = if order == 4 { 1e-3 } else { 1e-4 };
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let tau = random_tau(&mut rng);
        let g = tau.genus();
        let z = random_z(&mut rng, g);
        let ch = random_char(&mut rng, g);
        let jet = theta_jet_char(&z, &tau, &ch, order, TOL).unwrap();
        let scale = norm2(&jet.alphas().iter().map(|a| jet.get(a).unwrap()).collect::<Vec<_>>());
        let alphas: Vec<Vec<u32>> = jet.alphas().iter().filter(|a| a.iter().sum::<u32>() == order).cloned().collect();
        for j in 0..g {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            let jp = theta_jet_char(&zp, &tau, &ch, order - 1, TOL).unwrap();
            let jm = theta_jet_char(&zm, &tau, &ch, order - 1, TOL).unwrap();
            for a in alphas.iter().filter(|a| a[j] > 0) {
                let mut b = a.clone();
                b[j] -= 1;
                let fd = (jp.get(&b).unwrap() - jm.get(&b).unwrap()) / (2.0 * h);
                worst = worst.max((fd - jet.get(a).unwrap()).norm() / scale);
            }
        }
        // Single-derivative requests agree with the jet.
        let a = &alphas[rng.random_range(0..alphas.len())];
        let single = theta_eval(&ThetaRequest {
            z: z.clone(),
            tau: &tau,
            char: ch.clone(),
            deriv: DerivOrder::new(a.clone()).unwrap(),
            abs_tol: TOL,
        })
        .unwrap();
        worst = worst.max((single - jet.get(a).unwrap()).norm() / scale);
    }
    worst
}

fn graded_vectors(fs: &[GradedPoly]) -> Vec<Vec<C64>> {
    fs.iter().map(|f| f.coeff_vector(4)).collect()
}

/// Worst span residual of `H_z` against `{F[ε]}` for random `z`, on a random
/// genus-3 τ.
pub fn hirota_in_span(samples: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let tau = random_riemann_matrix(3, seed, 1.0 / 3.0);
    let table = build_table(&tau, TOL).unwrap();
    let fs: Vec<GradedPoly> = table.entries.iter().map(|e| dubrovin_quartic(&table, &e.eps).unwrap()).collect();
    let cols = graded_vectors(&fs);
    (0..samples)
        .map(|_| {
            let z = random_z(&mut rng, 3);
            let h = hirota_quartic(&z, &tau, TOL).unwrap();
            span_residual(&cols, &h.coeff_vector(4))
        })
        .fold(0.0, f64::max)
}

/// Worst ratio of non-U coefficients to U coefficients in `Σλ_εF[ε]` over the
/// nullspace basis, for random τ of genus 3 and 4.
pub fn cd_annihilation(seed: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for g in [3, 4] {
        let tau = random_riemann_matrix(g, seed + g as u64, 1.0 / g as f64);
        let table = build_table(&tau, TOL).unwrap();
        let fs: Vec<GradedPoly> = table.entries.iter().map(|e| dubrovin_quartic(&table, &e.eps).unwrap()).collect();
        let res = recover_from_table(table, &RecoveryOptions::default()).unwrap();
        for lam in &res.lambda_basis {
            let combo = fs
                .iter()
                .zip(lam)
                .fold(GradedPoly::zero(g), |acc, (f, l)| acc.add(&f.scale(*l)));
            let u = combo.u_part().coeff_norm_max();
            worst = worst.max(combo.max_non_u_coeff() / u);
        }
    }
    worst
}

/// Rosenbrock residuals from (−1.2, 1); returns the distance to (1, 1).
pub fn lm_rosenbrock() -> f64 {
    let f = ResidualMap::new(2, 2, |x: &[f64]| vec![1.0 - x[0], 10.0 * (x[1] - x[0] * x[0])]);
    let r = levenberg_marquardt(&f, &[-1.2, 1.0], &LmOptions { tol: 1e-14, ..Default::default() }).unwrap();
    ((r.x[0] - 1.0).powi(2) + (r.x[1] - 1.0).powi(2)).sqrt()
}

/// `x² − 2` from 1, without a Jacobian callback; returns the error in √2.
pub fn lm_sqrt2() -> f64 {
    let f = ResidualMap::new(1, 1, |x: &[f64]| vec![x[0] * x[0] - 2.0]);
    let r = levenberg_marquardt(&f, &[1.0], &LmOptions::default()).unwrap();
    (r.x[0] - 2f64.sqrt()).abs()
}

/// Systems `F_i = Π_k (a_ikᵀx − b_ik)` with known roots. Returns
/// `(instances with exactly the right root set, instances, worst root error)`.
pub fn path_tracker_oracle(instances: usize, seed: u64) -> (usize, usize, f64) {
    let mut rng = rng(seed);
    let mut exact = 0;
    let mut worst: f64 = 0.0;
    let gauss = |rng: &mut ChaCha8Rng| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    for inst in 0..instances {
        let n = rng.random_range(1..=3usize);
        let degs: Vec<usize> = loop {
            let d: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4usize)).collect();
            if d.iter().product::<usize>() <= 27 {
                break d;
            }
        };
        // factors[i][k] = (a, b) for the linear form aᵀx − b
        let factors: Vec<Vec<(Vec<C64>, C64)>> = degs
            .iter()
            .map(|&d| (0..d).map(|_| ((0..n).map(|_| gauss(&mut rng)).collect(), gauss(&mut rng))).collect())
            .collect();
        let polys: Vec<Poly> = factors
            .iter()
            .map(|fs| {
                fs.iter().fold(Poly::constant(n, C64::new(1.0, 0.0)), |acc, (a, b)| {
                    acc.mul(&Poly::linear(a).add(&Poly::constant(n, -b)))
                })
            })
            .collect();
        let mut expected: Vec<Vec<C64>> = Vec::new();
        let total: usize = degs.iter().product();
        for mut idx in 0..total {
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for i in 0..n {
                let (a, b) = &factors[i][idx % degs[i]];
                idx /= degs[i];
                rows.push(a.clone());
                rhs.push(*b);
            }
            let m = ComplexMatrix::from_rows(&rows).unwrap();
            expected.push(torelli::linalg::solve(&m, &rhs).unwrap());
        }
        let opts = HomotopyOptions { seed: 100 + inst as u64, ..Default::default() };
        let got = solve_square_system(&polys, &opts).unwrap();
        let mut matched = vec![false; got.len()];
        let mut all = true;
        for e in &expected {
            let best = got
                .iter()
                .enumerate()
                .map(|(k, x)| (k, norm2(&x.iter().zip(e).map(|(p, q)| p - q).collect::<Vec<_>>()) / norm2(e).max(1.0)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((k, d)) if d <= 1e-8 => {
                    matched[k] = true;
                    worst = worst.max(d);
                }
                _ => all = false,
            }
        }
        if all && matched.iter().all(|&m| m) && got.len() == expected.len() {
            exact += 1;
        }
    }
    (exact, instances, worst)
}

/// Largest coefficient magnitude of a polynomial.
pub trait CoeffMax {
    fn coeff_norm_max(&self) -> f64;
}

impl CoeffMax for Poly {
    fn coeff_norm_max(&self) -> f64 {
        self.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }
}

impl CoeffMax for HomogeneousPoly {
    fn coeff_norm_max(&self) -> f64 {
        self.as_poly().coeff_norm_max()
    }
}
