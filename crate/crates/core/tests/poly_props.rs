use num_complex::Complex64 as C64;
use proptest::prelude::*;
use torelli::linalg::ComplexMatrix;
use torelli::poly::{monomials, proportional, HomogeneousPoly, Monomial};

fn c64() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn hpoly(nvars: usize, degree: u32) -> impl Strategy<Value = HomogeneousPoly> {
    let n = monomials(nvars, degree).len();
    prop::collection::vec(c64(), n).prop_map(move |v| HomogeneousPoly::from_coeff_vector(nvars, degree, &v).unwrap())
}

fn point(nvars: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(c64(), nvars)
}

/// Diagonally dominant, so comfortably invertible.
fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(c64(), n * n).prop_map(move |v| {
        ComplexMatrix::from_fn(n, n, |i, j| v[i * n + j] * 0.2 + if i == j { 1.0 } else { 0.0 })
    })
}

fn close(a: C64, b: C64, scale: f64) -> bool {
    (a - b).norm() <= 1e-10 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn substitution_commutes_with_evaluation(p in hpoly(3, 4), a in matrix(3), x in point(3)) {
        let ax = a.matvec(&x);
        let lhs = p.substitute_linear(&a).unwrap().evaluate(&x).unwrap();
        let rhs = p.evaluate(&ax).unwrap();
        prop_assert!(close(lhs, rhs, rhs.norm() + p.coeff_norm()));
    }

    #[test]
    fn substitution_round_trip(p in hpoly(3, 4), a in matrix(3)) {
        let back = p.substitute_linear(&a).unwrap().substitute_linear(&a.inverse().unwrap()).unwrap();
        let d = back.sub(&p).unwrap().coeff_norm();
        prop_assert!(d <= 1e-10 * p.coeff_norm().max(1.0));
    }

    #[test]
    fn products_multiply_values(p in hpoly(4, 2), q in hpoly(4, 2), x in point(4)) {
        let pq = p.mul(&q).unwrap();
        prop_assert_eq!(pq.degree(), 4);
        let lhs = pq.evaluate(&x).unwrap();
        let rhs = p.evaluate(&x).unwrap() * q.evaluate(&x).unwrap();
        prop_assert!(close(lhs, rhs, rhs.norm() * 10.0));
    }

    #[test]
    fn json_round_trip_is_exact(p in hpoly(4, 3)) {
        let text = serde_json::to_string(&p.to_json()).unwrap();
        let back = HomogeneousPoly::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn coeff_vector_round_trip(p in hpoly(5, 2)) {
        let v = p.coeff_vector();
        prop_assert_eq!(HomogeneousPoly::from_coeff_vector(5, 2, &v).unwrap(), p);
    }

    #[test]
    fn normalize_is_proportional_and_idempotent(p in hpoly(3, 4), s in c64()) {
        prop_assume!(s.norm() > 1e-3);
        let n = p.normalize().unwrap();
        let n2 = p.scale(s).normalize().unwrap();
        prop_assert!(n.coeff_vector().iter().all(|c| c.norm() <= 1.0 + 1e-12));
        prop_assert!(proportional(&n, &p, 1e-12).unwrap().proportional);
        prop_assert!(n.sub(&n2).unwrap().coeff_norm() <= 1e-12 * n.coeff_norm());
    }

    #[test]
    fn graded_lex_is_total_and_sorted(nvars in 1usize..5, degree in 0u32..5) {
        let ms: Vec<Monomial> = (0..=degree).flat_map(|d| monomials(nvars, d)).map(Monomial).collect();
        prop_assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }
}
