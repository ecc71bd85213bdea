mod common;

use num_complex::Complex64 as C64;
use torelli::dubrovin::{
    cubic_from_singular, hirota_from_jet, hirota_quartic, membership_residual, quadric_from_singular,
    recover_quartics, RecoveryOptions,
};
use torelli::linalg::{norm2, span_residual};
use torelli::poly::{proportional, round_to_integers, RoundingOptions};
use torelli::theta::theta_jet;

#[test]
fn trott_recovery_matches_reference_quartic() {
    let f = common::load("trott_tau.json");
    let r = recover_quartics(&f.riemann().unwrap(), &RecoveryOptions::default()).unwrap();
    assert_eq!(r.nullspace_dim(), 1);
    assert!(!r.dimension_mismatch);
    let q = &r.quartics[0];
    let p = proportional(q, &common::trott_reference_quartic(), 1e-6).unwrap();
    assert!(p.proportional, "dist {:e}", p.dist);
    let pulled = q.substitute_linear(&f.pi_a().unwrap().inverse().unwrap()).unwrap();
    let (ints, dev) = round_to_integers(&pulled, &RoundingOptions::default()).unwrap();
    assert_eq!(ints.to_homogeneous(), common::trott_integer_quartic());
    assert!(dev < 1e-6);
}

#[test]
fn nullspace_dimensions_follow_the_lemma() {
    for (name, dim) in [("trott_tau.json", 1), ("genus4_tau.json", 5), ("genus5_tau.json", 16)] {
        let f = common::load(name);
        let r = recover_quartics(&f.riemann().unwrap(), &RecoveryOptions::default()).unwrap();
        assert_eq!(r.nullspace_dim(), dim, "{name}");
        assert_eq!(r.expected_dim, dim);
    }
}

#[test]
fn sample_points_lie_on_the_recovered_quartics() {
    for name in ["genus4_tau.json", "genus5_tau.json"] {
        let f = common::load(name);
        let r = recover_quartics(&f.riemann().unwrap(), &RecoveryOptions::default()).unwrap();
        let res = membership_residual(&r.quartics, &f.points()).unwrap();
        assert!(res <= 1e-7, "{name}: {res:e}");
    }
}

#[test]
fn recovery_span_is_independent_of_sweep_order() {
    let f = common::load("genus4_tau.json");
    let tau = f.riemann().unwrap();
    let run = |seed| {
        let opts = RecoveryOptions { nullspace_seed: seed, ..Default::default() };
        recover_quartics(&tau, &opts).unwrap().quartics.iter().map(|q| q.coeff_vector()).collect::<Vec<_>>()
    };
    let (a, b) = (run(Some(3)), run(Some(4)));
    for v in &a {
        assert!(span_residual(&b, v) <= 1e-8);
    }
    for v in &b {
        assert!(span_residual(&a, v) <= 1e-8);
    }
}

#[test]
fn hirota_and_dubrovin_property_checks() {
    let e = common::checks::hirota_in_span(10, 21);
    assert!(e <= 1e-7, "span {e:e}");
    let e = common::checks::cd_annihilation(22);
    assert!(e <= 1e-8, "annihilation {e:e}");
}

#[test]
fn hirota_c_and_d_blocks() {
    let tau = torelli::solve::random_riemann_matrix(3, 8, 1.0 / 3.0);
    let z = [C64::new(0.1, 0.05), C64::new(-0.2, 0.1), C64::new(0.3, 0.0)];
    let jet = theta_jet(&z, &tau, 4, 1e-13).unwrap();
    let h = hirota_from_jet(&jet);
    let g = 3;
    let th = jet.value();
    let scale = th.norm().powi(2) + jet.gradient().iter().map(|v| v.norm_sqr()).sum::<f64>();
    let mut e = vec![0u32; 3 * g + 2];
    e[3 * g + 1] = 1;
    assert!((h.coeff(&e) - th * th * 8.0).norm() <= 1e-10 * scale);
    for i in 0..g {
        for j in i..g {
            let mut e = vec![0u32; 3 * g + 2];
            e[3 * g] = 1;
            e[i] += 1;
            e[j] += 1;
            let mult = if i == j { 1.0 } else { 2.0 };
            let want = (jet.partial(&[i, j]) * th - jet.partial(&[i]) * jet.partial(&[j])) * (6.0 * mult);
            assert!((h.coeff(&e) - want).norm() <= 1e-10 * scale);
        }
    }
}

#[test]
fn genus4_singular_point_reductions() {
    let f = common::load("genus4_tau.json");
    let tau = f.riemann().unwrap();
    let p = common::genus4_singular_point(&tau);
    assert!(p.residual <= 1e-10);
    let pi_inv = f.pi_a().unwrap().inverse().unwrap();

    let q = quadric_from_singular(&p.z, &tau, 1e-13).unwrap();
    let d = proportional(&q.substitute_linear(&pi_inv).unwrap(), &common::genus4_quadric(), 1e-6).unwrap();
    assert!(d.proportional, "quadric dist {:e}", d.dist);

    // H_{z₀} = 3Q² on the U block.
    let h = hirota_quartic(&p.z, &tau, 1e-13).unwrap();
    let hu = torelli::poly::HomogeneousPoly::from_poly(h.u_part(), 4).unwrap();
    let q2 = q.mul(&q).unwrap().scale(C64::new(3.0, 0.0));
    let err = hu.sub(&q2).unwrap().coeff_norm() / hu.coeff_norm();
    assert!(err <= 1e-6, "H = 3Q² error {err:e}");

    // Q² lies in the span of the recovered quartics.
    let r = recover_quartics(&tau, &RecoveryOptions::default()).unwrap();
    let cols: Vec<Vec<C64>> = r.quartics.iter().map(|x| x.coeff_vector()).collect();
    assert!(span_residual(&cols, &q.mul(&q).unwrap().coeff_vector()) <= 1e-6);

    let c = cubic_from_singular(&p.z, &tau, 1e-13).unwrap().substitute_linear(&pi_inv).unwrap();
    let res = span_residual(&common::genus4_cubic_space(), &c.coeff_vector());
    assert!(res <= 1e-6, "cubic residual {res:e}");

    // ∂_U H_z at z₀ equals 2·Q·C.
    let cubic = cubic_from_singular(&p.z, &tau, 1e-13).unwrap();
    let lhs = common::hirota_u_derivative(&p.z, &tau, 1e-4);
    let rhs = q.mul(&cubic).unwrap().scale(C64::new(2.0, 0.0));
    let diff: Vec<C64> = lhs.coeff_vector().iter().zip(rhs.coeff_vector()).map(|(a, b)| a - b).collect();
    let rel = norm2(&diff) / norm2(&rhs.coeff_vector());
    assert!(rel <= 1e-5, "quintic identity {rel:e}");
}
