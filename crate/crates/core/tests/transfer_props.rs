mod common;

use std::sync::Arc;

use baxter_core::baxterize::{baxterize_profile, YFunction};
use baxter_core::linalg::residual;
use baxter_core::rmatrix::check_ybe_braided;
use baxter_core::transfer::{check_transfer_commutation, transfer_matrix};
use baxter_core::{SampleGrid, ScalarFn, SpectralOperator, VertexWeights};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn fixtures() -> Vec<SpectralOperator> {
    vec![
        rational(2.0),
        yang(),
        tl_plus(2.0),
        baxterize_profile(&bgr3(), None, &YFunction::affine()).unwrap().output,
        generic(),
    ]
}

/// A YBE solution gives commuting transfer matrices on every short chain.
#[test]
fn ybe_implies_commuting_transfer_matrices() {
    let tol = 1e-11;
    let grid = SampleGrid::default();
    let mut solutions = 0;
    for op in fixtures() {
        if !check_ybe_braided(&op, &grid, tol).unwrap().pass {
            continue;
        }
        solutions += 1;
        let w = VertexWeights::new(op.clone());
        for n in 2..=4 {
            let rep = check_transfer_commutation(&w, n, &grid, 100.0 * tol).unwrap();
            assert!(rep.pass, "{} N={n}: {:e}", op.label(), rep.max_residual);
        }
    }
    assert_eq!(solutions, 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// `N(u)Ř` gives `N(u)^N T(u)`, and the commutation verdict is unchanged.
    #[test]
    fn normalization_scales_transfer(a in -0.5f64..0.5, b in -0.5f64..0.5, x in -0.9f64..0.9, n in 1usize..=3) {
        let norm: ScalarFn = Arc::new(move |u: Complex64| Ok(1.0 + u * a + u * u * b));
        let grid = SampleGrid::default();
        for op in [rational(2.0), generic()] {
            let base = VertexWeights::new(op.clone());
            let scaled = VertexWeights::new(op.scaled(norm.clone()));
            let u = c(x);
            let t0 = transfer_matrix(&base, n, u).unwrap().matrix;
            let t1 = transfer_matrix(&scaled, n, u).unwrap().matrix;
            let factor = norm(u).unwrap().powu(n as u32);
            prop_assert!(residual(&t1, &t0.scale(factor)) < 1e-12);

            let v0 = check_transfer_commutation(&base, n.max(2), &grid, 1e-9).unwrap().pass;
            let v1 = check_transfer_commutation(&scaled, n.max(2), &grid, 1e-9).unwrap().pass;
            prop_assert_eq!(v0, v1, "{}", op.label());
        }
    }
}
