//! Operators shared by the integration tests.
#![allow(dead_code)]

use baxter_core::linalg::permutation_operator;
use baxter_core::{CMatrix, SpectralOperator};
use num_complex::Complex64;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// TL generator with `T² = -2T`.
pub fn t_matrix() -> CMatrix {
    CMatrix::from_real(
        4,
        &[0., 0., 0., 0., 0., -1., 1., 0., 0., 1., -1., 0., 0., 0., 0., 0.],
    )
    .unwrap()
}

/// `(|01⟩+|10⟩)(⟨01|+⟨10|)`, a TL generator with loop value 2.
pub fn e_plus() -> CMatrix {
    CMatrix::from_real(
        4,
        &[0., 0., 0., 0., 0., 1., 1., 0., 0., 1., 1., 0., 0., 0., 0., 0.],
    )
    .unwrap()
}

/// The four-state braid group representation with parameters `q, p, t`.
pub fn b_qpt(q: f64, p: f64, t: f64) -> CMatrix {
    CMatrix::from_real(
        4,
        &[q, 0., 0., 0., t, 0., p, 0., t, p, 0., 0., 2. * t * t / (q - p), -t, -t, q],
    )
    .unwrap()
}

pub fn bgr3() -> CMatrix {
    b_qpt(3.0, 1.0, 1.0)
}

/// `I - u/(k-u)·T`.
pub fn rational(k: f64) -> SpectralOperator {
    let t = t_matrix();
    SpectralOperator::from_fn(2, "rational", vec![c(k)], move |u| {
        Ok(&CMatrix::identity(4) - &t.scale(u / (c(k) - u)))
    })
}

/// `I + uP`.
pub fn yang() -> SpectralOperator {
    let p = permutation_operator(2);
    SpectralOperator::from_fn(2, "yang", vec![], move |u| Ok(&CMatrix::identity(4) + &p.scale(u)))
}

/// `(k-u)I + uE` with `E` = [`e_plus`]; crossing-symmetric at `λ = k`.
pub fn tl_plus(k: f64) -> SpectralOperator {
    let e = e_plus();
    SpectralOperator::from_fn(2, "tl_plus", vec![], move |u| {
        Ok(&CMatrix::identity(4).scale(c(k) - u) + &e.scale(u))
    })
}

/// A fixed matrix pencil `A + uB` with no special structure.
pub fn generic() -> SpectralOperator {
    let a = CMatrix::from_real(4, &[0.3, 1.1, -0.2, 0.7, 0.5, -0.9, 0.4, 0.1, 1.3, 0.2, 0.8, -0.6, -0.4, 0.6, 0.9, 0.2]).unwrap();
    let b = CMatrix::from_real(4, &[1.0, -0.3, 0.6, 0.2, 0.1, 0.4, -0.7, 0.9, 0.5, 0.3, 0.2, -0.8, 0.7, -0.1, 0.3, 0.6]).unwrap();
    SpectralOperator::from_fn(2, "generic", vec![], move |u| Ok(&a + &b.scale(u)))
}

/// Weight `S^{ik}_{jl}` read straight from the matrix, independent of the crate's table.
pub fn weight(m: &CMatrix, d: usize, i: usize, k: usize, j: usize, l: usize) -> Complex64 {
    m.get(l * d + k, i * d + j)
}

/// `E_q` with `E² = (q + 1/q)E` and `E₁E₂E₁ = E₁`.
pub fn e_q(q: Complex64) -> CMatrix {
    let z = c(0.0);
    let one = c(1.0);
    CMatrix::new(
        4,
        vec![z, z, z, z, z, q, one, z, z, one, one / q, z, z, z, z, z],
    )
    .unwrap()
}
