#![allow(dead_code)]
pub mod checks;


use num_complex::Complex64 as C64;
use std::path::PathBuf;
use torelli::cli::TauFile;
use torelli::poly::HomogeneousPoly;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> TauFile {
    TauFile::load(&fixture_path(name)).expect("fixture parses")
}

/// `81u₁⁴ − 225u₁²u₂² − 225u₁²u₃² + 144u₂⁴ + 350u₂²u₃² + 144u₃⁴`.
pub fn trott_integer_quartic() -> HomogeneousPoly {
    HomogeneousPoly::from_real_terms(
        3,
        4,
        &[
            (&[4, 0, 0], 81.0),
            (&[2, 2, 0], -225.0),
            (&[2, 0, 2], -225.0),
            (&[0, 4, 0], 144.0),
            (&[0, 2, 2], 350.0),
            (&[0, 0, 4], 144.0),
        ],
    )
    .unwrap()
}

/// The normalized-coordinate Trott quartic, to 17 digits.
pub fn trott_reference_quartic() -> HomogeneousPoly {
    let t = |e: [u32; 3], re: f64, im: f64| (e.to_vec(), C64::new(re, im));
    HomogeneousPoly::from_terms(
        3,
        4,
        vec![
            t([4, 0, 0], 0.44055338231573327, -0.11712521895532513),
            t([3, 1, 0], 2.094882287195226, 7.879664904010854),
            t([3, 0, 1], -5.316458517368645, 1.4134300016965646),
            t([2, 2, 0], 61.49338091003442, -16.348587918073555),
            t([2, 1, 1], 27.505923029039046, 105.6412469122926),
            t([2, 0, 2], -43.67750279381081, 12.658628276584892),
            t([1, 3, 0], -0.20611709900405373, -0.7752863638524854),
            t([1, 2, 1], 142.137577271911, 22.777083502115772),
            t([1, 1, 2], 101.16905240593528, 146.6228999954985),
            t([1, 0, 3], -28.214458865117336, 92.58798535078905),
            t([0, 4, 0], -0.06519271764094459, 0.017332091034810038),
            t([0, 3, 1], -0.016856400506870983, -0.8256030828721883),
            t([0, 2, 2], 64.66553470742735, 38.49587006148285),
            t([0, 1, 3], 94.88897578016996, 81.18194430047456),
            t([0, 0, 4], 33.080420780163195, 41.521570514217885),
        ],
    )
    .unwrap()
}

/// `u₁u₄ − u₂u₃`.
pub fn genus4_quadric() -> HomogeneousPoly {
    HomogeneousPoly::from_real_terms(4, 2, &[(&[1, 0, 0, 1], 1.0), (&[0, 1, 1, 0], -1.0)]).unwrap()
}

/// `u₁³ − u₂³ − u₃³ − u₄³`.
pub fn genus4_cubic() -> HomogeneousPoly {
    HomogeneousPoly::from_real_terms(
        4,
        3,
        &[(&[3, 0, 0, 0], 1.0), (&[0, 3, 0, 0], -1.0), (&[0, 0, 3, 0], -1.0), (&[0, 0, 0, 3], -1.0)],
    )
    .unwrap()
}

/// `span{u₁³ − u₂³ − u₃³ − u₄³} + span{u_i(u₁u₄ − u₂u₃)}` as coefficient vectors.
pub fn genus4_cubic_space() -> Vec<Vec<C64>> {
    let q = genus4_quadric();
    let mut cols = vec![genus4_cubic().coeff_vector()];
    for i in 0..4 {
        let mut e = vec![0; 4];
        e[i] = 1;
        let ui = HomogeneousPoly::from_real_terms(4, 1, &[(&e, 1.0)]).unwrap();
        cols.push(ui.mul(&q).unwrap().coeff_vector());
    }
    cols
}

/// A singular point of the theta divisor for the genus-4 fixture, found with
/// the CLI's default seed.
pub fn genus4_singular_point(tau: &torelli::theta::RiemannMatrix) -> torelli::solve::SingularPoint {
    torelli::solve::find_singular_point(tau, torelli::cli::DEFAULT_SEED, &Default::default()).expect("singular point")
}

/// `(∂/∂z)` of the U-part of `H_z` along `U`, as a quintic in `U`, by central
/// differences of the coefficients in each `z_k`.
pub fn hirota_u_derivative(z0: &[C64], tau: &torelli::theta::RiemannMatrix, h: f64) -> HomogeneousPoly {
    use torelli::dubrovin::hirota_quartic;
    use torelli::poly::Poly;
    let g = z0.len();
    let mut out = Poly::zero(g);
    for k in 0..g {
        let mut zp = z0.to_vec();
        let mut zm = z0.to_vec();
        zp[k] += h;
        zm[k] -= h;
        let hp = hirota_quartic(&zp, tau, 1e-13).unwrap().u_part();
        let hm = hirota_quartic(&zm, tau, 1e-13).unwrap().u_part();
        let d = hp.add(&hm.scale(C64::new(-1.0, 0.0))).scale(C64::new(1.0 / (2.0 * h), 0.0));
        let mut e = vec![0; g];
        e[k] = 1;
        let uk = Poly::from_terms(g, [(e, C64::new(1.0, 0.0))]).unwrap();
        out = out.add(&uk.mul(&d));
    }
    HomogeneousPoly::from_poly(out, 5).unwrap()
}
