mod common;

use baxter_core::algebra::{
    bmw_prime_report, check_bmw_prime, check_braid_relations, check_temperley_lieb, fit_skein_4cb, SKEIN,
};
use baxter_core::baxterize::bmw_normalize;
use baxter_core::linalg::residual;
use baxter_core::{CMatrix, Error};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn xis(q: Complex64) -> Vec<Complex64> {
    vec![c(1.0), c(-1.0), c(0.5), Complex64::new(2.0, 1.0), -q, -1.0 / q]
}

proptest! {
    /// `I + ξE` braids exactly when `ξ² + δξ + 1 = 0`.
    #[test]
    fn tl_generators_braid_on_the_quadratic(re in 0.3f64..3.0, im in -1.0f64..1.0) {
        let q = Complex64::new(re, im);
        let e = e_q(q);
        let (params, rep) = check_temperley_lieb(&e, 2, 1e-10).unwrap();
        prop_assert!(rep.pass);
        prop_assert!((params.delta - (q + 1.0 / q)).norm() < 1e-10);
        for xi in xis(q) {
            let g = &CMatrix::identity(4) + &e.scale(xi);
            let quadratic = (xi * xi + params.delta * xi + 1.0).norm();
            match check_braid_relations(&g, 2, 1e-9) {
                Ok(r) => prop_assert_eq!(r.pass, quadratic < 1e-9, "xi={} quadratic={:e}", xi, quadratic),
                Err(Error::Singular { .. }) => {}
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
    }

    #[test]
    fn delta_is_scale_covariant(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let s = Complex64::new(re, im);
        prop_assume!(s.norm() > 1e-3);
        let (p, _) = check_temperley_lieb(&t_matrix().scale(s), 2, 1e-9).unwrap();
        prop_assert!((p.delta - s * -2.0).norm() < 1e-12 * s.norm().max(1.0));
    }
}

#[test]
fn braid_examples() {
    assert!(check_braid_relations(&bgr3(), 2, 1e-12).unwrap().pass);
    let not_braid = &CMatrix::identity(4) + &baxter_core::linalg::permutation_operator(2).scale(c(0.5));
    assert!(!check_braid_relations(&not_braid, 2, 1e-9).unwrap().pass);
    let singular = &CMatrix::identity(4) + &baxter_core::linalg::permutation_operator(2);
    assert!(matches!(check_braid_relations(&singular, 2, 1e-9), Err(Error::Singular { .. })));
}

#[test]
fn t_is_temperley_lieb_with_minus_two() {
    let (p, rep) = check_temperley_lieb(&t_matrix(), 2, 1e-12).unwrap();
    assert!(rep.pass);
    assert!((p.delta - c(-2.0)).norm() < 1e-12);
    assert!(!rep.sub("E1 E2 E1 = E2 (printed variant)").unwrap().pass);
}

/// The normalized pair for ordering (q, p, -p) satisfies every BMW′ relation
/// except the skein relation, where E from the m formula is off by a factor.
#[test]
fn bmw_relations_for_normalized_representation() {
    let n = bmw_normalize(&bgr3(), Some(&[c(3.0), c(1.0), c(-1.0)]), 1e-9).unwrap();
    let e = n.e().unwrap();
    assert!(residual(e, &t_matrix()) < 1e-12);
    let (params, rep) = bmw_prime_report(&n.g, e, 2, 1e-9).unwrap();
    assert!(!rep.pass);
    assert!(rep.sub(SKEIN).unwrap().max_residual > 0.5);
    for s in rep.breakdown.iter().filter(|s| s.name != SKEIN && !s.informational) {
        assert!(s.pass, "{}: {:e}", s.name, s.max_residual);
    }
    assert!((params.l.unwrap() - c(-3f64.sqrt())).norm() < 1e-12);
    assert!(matches!(
        check_bmw_prime(&n.g, e, 2, 1e-9),
        Err(Error::InconsistentParams { name: "m", .. })
    ));
}

#[test]
fn skein_fit_recovers_the_cubic_relation() {
    let n = bmw_normalize(&bgr3(), Some(&[c(3.0), c(1.0), c(-1.0)]), 1e-9).unwrap();
    let s = fit_skein_4cb(&n.g, n.e().unwrap()).unwrap();
    assert!(s.residual <= 1e-10);
    assert_eq!(s.beta, c(0.0));
    assert!(!s.unique);
    let linv = 1.0 / n.l;
    assert!((s.gamma - (n.m + linv)).norm() < 1e-10);
    assert!((s.alpha + (n.m * linv + 1.0)).norm() < 1e-10);
    assert!((s.delta4 - linv).norm() < 1e-10);
}

#[test]
fn skein_fit_with_quartic_generator() {
    let g = CMatrix::from_real(4, &[2.0, 0.3, 0.0, 0.1, 0.0, -1.0, 0.4, 0.0, 0.2, 0.0, 0.5, 0.3, 0.0, 0.1, 0.0, 3.0]).unwrap();
    let gi = g.inverse().unwrap();
    let (alpha, gamma, delta4) = (c(0.7), Complex64::new(-0.2, 0.4), c(1.3));
    let e = &(&(&g * &g) - &CMatrix::identity(4).scale(alpha)) - &(&g.scale(gamma) + &gi.scale(delta4));
    let s = fit_skein_4cb(&g, &e).unwrap();
    assert!(s.unique);
    assert!(s.residual < 1e-12);
    assert!((s.beta - c(1.0)).norm() < 1e-9);
    assert!((s.alpha - alpha).norm() < 1e-9);
    assert!((s.gamma - gamma).norm() < 1e-9);
    assert!((s.delta4 - delta4).norm() < 1e-9);
}
