use baxter_core::linalg::{embed_pair, kron, residual, spectral_projectors, DEFAULT_GROUPING_TOL};
use baxter_core::CMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim * dim)
        .prop_map(move |v| CMatrix::new(dim, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

proptest! {
    #[test]
    fn kron_is_associative(a in matrix(2), b in matrix(2), c in matrix(3)) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(residual(&left, &right) < 1e-13);
    }

    #[test]
    fn kron_is_multiplicative(a in matrix(2), b in matrix(2), c in matrix(2), d in matrix(2)) {
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!(residual(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn distant_embeddings_commute(a in matrix(4), b in matrix(4)) {
        let x = embed_pair(&a, 1, 4, 2).unwrap();
        let y = embed_pair(&b, 3, 4, 2).unwrap();
        prop_assert!(x.commutator(&y).max_abs() < 1e-12);
    }

    #[test]
    fn projectors_reconstruct(
        s in matrix(4),
        eig in prop::sample::subsequence(vec![-2.0, -0.5, 0.75, 1.0, 3.0], 1..=4),
        pattern in prop::collection::vec(0usize..4, 4),
    ) {
        prop_assume!(s.rcond() > 1e-3);
        let values: Vec<Complex64> = pattern.iter().map(|&p| Complex64::new(eig[p % eig.len()], 0.0)).collect();
        let b = &(&s * &CMatrix::diag(&values)) * &s.inverse().unwrap();
        let pf = spectral_projectors(&b, DEFAULT_GROUPING_TOL).unwrap();
        prop_assert!(residual(&pf.reconstruct(), &b) < 1e-7);
        for p in pf.projectors() {
            prop_assert!(residual(&(p * p), p) < 1e-7);
        }
    }
}
