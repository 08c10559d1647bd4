mod common;

use baxter_core::baxterize::{
    baxterize_profile, baxterize_three_blocks, baxterize_two_blocks, baxterize_two_blocks_tl, enumerate_orderings,
    lambda_profile, BraidLimit, YConvention, YFunction,
};
use baxter_core::exprfn::Bindings;
use baxter_core::linalg::residual;
use baxter_core::rmatrix::check_ybe_braided;
use baxter_core::{CMatrix, SampleGrid};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

/// `S·diag(eigs)·S⁻¹` on a 4-dimensional space.
fn conjugated(eigs: [f64; 4], mix: [f64; 6]) -> CMatrix {
    let mut s = CMatrix::identity(4).entries().to_vec();
    for (slot, &m) in [1usize, 4, 6, 9, 11, 14].iter().zip(&mix) {
        s[*slot] = c(m);
    }
    let s = CMatrix::new(4, s).unwrap();
    &(&s * &CMatrix::diag_real(&eigs)) * &s.inverse().unwrap()
}

/// Best scalar `s` with `a ≈ s·b`, and the residual of that fit.
fn ratio(a: &CMatrix, b: &CMatrix) -> (Complex64, f64) {
    let s = b.inner(a) / b.inner(b);
    (s, residual(a, &b.scale(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// At `y = 0` every profile returns the source operator.
    #[test]
    fn braid_limit_round_trip(
        a in 1.5f64..3.0, b in 0.2f64..1.2, cc in -2.0f64..-0.3,
        mix in prop::array::uniform6(-0.4f64..0.4),
    ) {
        let two = conjugated([a, b, b, b], mix);
        let three = conjugated([a, b, cc, cc], mix);
        let y = YFunction::affine();
        for recipe in [
            baxterize_profile(&two, None, &y).unwrap(),
            baxterize_two_blocks(&two, None, &y).unwrap(),
            baxterize_profile(&three, None, &y).unwrap(),
            baxterize_three_blocks(&three, None, &y).unwrap(),
        ] {
            let at_limit = recipe.output.at(c(1.0)).unwrap();
            prop_assert!(residual(&at_limit, &recipe.source) < 1e-8, "{}", recipe.method);
            prop_assert!(recipe.construction.pass, "{:?}", recipe.construction);
        }
    }

    /// `Λ₁(u)Λ₁(-u) - Λ₂(u)Λ₂(-u) = (λ₂² - λ₁²)(y(u)y(-u) - 1)`.
    #[test]
    fn two_block_lambda_identity(l1 in -3.0f64..3.0, l2 in -3.0f64..3.0, x in -0.9f64..0.9) {
        prop_assume!(l1.abs() > 0.1 && l2.abs() > 0.1);
        let y = YFunction::affine();
        let lam = lambda_profile(&[c(l1), c(l2)], &y).unwrap();
        let u = c(x);
        let lhs = lam[0](u).unwrap() * lam[0](-u).unwrap() - lam[1](u).unwrap() * lam[1](-u).unwrap();
        let (yu, ym) = (c(1.0) - u, c(1.0) + u);
        let rhs = c(l2 * l2 - l1 * l1) * (yu * ym - 1.0);
        prop_assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
    }

    /// For `B = I - qE_q` the TL path with `y = u/k` and the two-block path
    /// with the matching profile agree up to a scalar.
    #[test]
    fn two_paths_agree_up_to_scalar(q in 1.2f64..3.0, k in 1.0f64..3.0) {
        let b = &CMatrix::identity(4) - &e_q(c(q)).scale(c(q));
        let qq = q * q;
        let yp = YFunction::custom(
            "((k+u) + Q*(k-u))/((k-u) + Q*(k+u))",
            Bindings::new().with("k", k).with("Q", qq),
            BraidLimit::Finite(c(k * (qq + 1.0) / (qq - 1.0))),
            YConvention::Profile,
        )
        .unwrap();
        let two = baxterize_two_blocks(&b, None, &yp).unwrap();
        let tl = baxterize_two_blocks_tl(&b, None, &YFunction::linear(c(k)).unwrap(), false, 1e-9).unwrap();
        prop_assert!((two.ordering[0] - 1.0).norm() < 1e-9 && (two.ordering[1] + qq).norm() < 1e-9 * qq);
        for x in [0.3, -0.45, 0.8] {
            let (_, res) = ratio(&two.output.at(c(x)).unwrap(), &tl.output.at(c(x)).unwrap());
            prop_assert!(res < 1e-10, "u={} residual {:e}", x, res);
        }
    }
}

#[test]
fn tl_path_regenerates_the_rational_solution() {
    let k = 2.0;
    let recipe = baxterize_two_blocks_tl(&bgr3(), None, &YFunction::linear(c(k)).unwrap(), false, 1e-9).unwrap();
    let expected = rational(k);
    for x in [0.3, 1.0, -0.7] {
        let got = recipe.output.at(c(x)).unwrap();
        assert!(residual(&got, &expected.at(c(x)).unwrap()) < 1e-12, "u={x}");
    }
    assert!(check_ybe_braided(&recipe.output, &SampleGrid::default(), 1e-10).unwrap().pass);

    let direct = baxterize_two_blocks_tl(&t_matrix(), None, &YFunction::linear(c(k)).unwrap(), true, 1e-9).unwrap();
    for x in [0.3, 1.0, -0.7] {
        assert!(residual(&direct.output.at(c(x)).unwrap(), &expected.at(c(x)).unwrap()) < 1e-12);
    }
}

/// The three-block recipe for the q=3 representation satisfies the YBE
/// exactly when the doubled eigenvalue is not in the middle.
#[test]
fn three_block_ordering_verdicts() {
    let verdicts = enumerate_orderings(&bgr3(), &YFunction::affine(), &SampleGrid::default(), 1e-9).unwrap();
    assert_eq!(verdicts.len(), 6);
    for v in &verdicts {
        let middle_is_q = (v.recipe.ordering[1] - c(3.0)).norm() < 1e-8;
        assert_eq!(v.ybe.pass, !middle_is_q, "{:?}: {:e}", v.recipe.ordering, v.ybe.max_residual);
    }
}

#[test]
fn diag_two_block_recipe_is_not_a_solution() {
    let b = CMatrix::diag_real(&[2.0, 1.0, 1.0, 1.0]);
    let recipe = baxterize_two_blocks(&b, None, &YFunction::affine()).unwrap();
    assert!(recipe.construction.pass);
    assert!(residual(&recipe.output.at(c(1.0)).unwrap(), &b) < 1e-12);
    assert!(!check_ybe_braided(&recipe.output, &SampleGrid::default(), 1e-9).unwrap().pass);
}
