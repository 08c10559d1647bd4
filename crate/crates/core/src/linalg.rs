//! Dense complex matrices on tensor-product spaces.
//!
//! Basis ordering of `V ⊗ W` is `|a⟩ ⊗ |b⟩ ↦ a * dim(W) + b`, zero-based.
//! Every comparison in the crate goes through [`residual`], the relative
//! max-entry norm `max|a - b| / max(1, max|a|, max|b|)`.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance under which two computed eigenvalues are merged.
pub const DEFAULT_GROUPING_TOL: f64 = 1e-8;

/// Projector families whose defining identities miss by more than this are
/// rejected as non-diagonalizable.
pub const PROJECTOR_TOL: f64 = 1e-7;

/// Reciprocal condition number under which a matrix counts as singular.
pub const SINGULAR_RCOND: f64 = 1e-10;

const SCHUR_EPS_LADDER: [f64; 4] = [f64::EPSILON, 1e-14, 1e-12, 1e-10];
const SCHUR_MAX_ITER: usize = 20_000;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl CMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::BadShape {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { dim, entries })
    }

    /// Real-valued convenience constructor.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn diag(values: &[Complex64]) -> Self {
        Self::from_fn(values.len(), |r, c| if r == c { values[r] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |r, c| {
            if r == c {
                Complex64::new(values[r], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Matrix unit `E_{ab}` with a single one at `(a, b)`.
    pub fn unit(dim: usize, a: usize, b: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == a && c == b { ONE } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    /// Frobenius inner product `Σ conj(a_ij) b_ij`.
    pub fn inner(&self, other: &CMatrix) -> Complex64 {
        assert_eq!(self.dim, other.dim, "inner product of mismatched matrices");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    pub fn pow(&self, n: u32) -> CMatrix {
        let mut acc = CMatrix::identity(self.dim);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), |r, c| m[(r, c)])
    }

    /// `σ_min / σ_max`; zero for the zero matrix.
    pub fn rcond(&self) -> f64 {
        let sv = self.to_nalgebra().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let rcond = self.rcond();
        if rcond < SINGULAR_RCOND {
            return Err(Error::Singular { rcond });
        }
        self.to_nalgebra()
            .try_inverse()
            .map(|m| Self::from_nalgebra(&m))
            .ok_or(Error::Singular { rcond })
    }

    /// Numerical spectrum with multiplicity, via a complex Schur form.
    ///
    /// Exactly repeated eigenvalues can stall deflation at machine precision,
    /// so the convergence threshold is relaxed in steps with a bounded
    /// iteration count. Panics if even the loosest threshold fails.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let m = self.to_nalgebra();
        for eps in SCHUR_EPS_LADDER {
            if let Some(schur) = m.clone().try_schur(eps, SCHUR_MAX_ITER) {
                let (_, t) = schur.unpack();
                return (0..self.dim).map(|i| t[(i, i)]).collect();
            }
        }
        panic!("Schur iteration did not converge for a {}x{} matrix", self.dim, self.dim)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.dim + c]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    if z.im == 0.0 {
                        format!("{:.6}", z.re)
                    } else {
                        format!("{:.6}{:+.6}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product of mismatched dimensions");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.entries[i * n..(i + 1) * n];
            let acc = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.entries[k * n..(k + 1) * n];
                for (o, &b) in acc.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        CMatrix { dim: n, entries: out }
    }
}

impl Mul<Complex64> for &CMatrix {
    type Output = CMatrix;

    fn mul(self, s: Complex64) -> CMatrix {
        self.scale(s)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum of mismatched dimensions");
        CMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference of mismatched dimensions");
        CMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

/// Relative max-entry residual between two matrices of equal dimension.
pub fn residual(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.dim, b.dim, "residual of mismatched matrices");
    let diff = a
        .entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    diff / 1f64.max(a.max_abs()).max(b.max_abs())
}

/// Relative residual of `a` against zero.
pub fn residual_zero(a: &CMatrix) -> f64 {
    a.max_abs() / 1f64.max(a.max_abs())
}

/// Relative residual between two scalars, same convention as [`residual`].
pub fn scalar_residual(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m) = (a.dim, b.dim);
    let dim = n * m;
    let mut entries = vec![ZERO; dim * dim];
    for i in 0..n {
        for j in 0..n {
            let s = a.get(i, j);
            if s == ZERO {
                continue;
            }
            for p in 0..m {
                for q in 0..m {
                    entries[(i * m + p) * dim + (j * m + q)] = s * b.get(p, q);
                }
            }
        }
    }
    CMatrix { dim, entries }
}

/// `I^{⊗(site-1)} ⊗ m ⊗ I^{⊗(chain_len-site-1)}` for a two-site operator `m`.
pub fn embed_pair(m: &CMatrix, site: usize, chain_len: usize, local_dim: usize) -> Result<CMatrix> {
    if m.dim != local_dim * local_dim {
        return Err(Error::DimMismatch {
            expected: local_dim * local_dim,
            got: m.dim,
        });
    }
    if chain_len < 2 || site < 1 || site > chain_len - 1 {
        return Err(Error::SiteOutOfRange { site, chain_len });
    }
    let left = CMatrix::identity(local_dim.pow(site as u32 - 1));
    let right = CMatrix::identity(local_dim.pow((chain_len - site - 1) as u32));
    Ok(kron(&kron(&left, m), &right))
}

/// The swap `P(|a⟩⊗|b⟩) = |b⟩⊗|a⟩` on `V ⊗ V`.
pub fn permutation_operator(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, |r, c| {
        let (a, b) = (r / d, r % d);
        if c == b * d + a {
            ONE
        } else {
            ZERO
        }
    })
}

/// Distinct eigenvalues of `b`, merging values closer than `grouping_tol`.
///
/// Clusters are linked transitively and represented by their mean. The
/// result is sorted by descending real part, then descending imaginary part.
pub fn distinct_eigenvalues(b: &CMatrix, grouping_tol: f64) -> Vec<Complex64> {
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for z in b.eigenvalues() {
        let hits: Vec<usize> = clusters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().any(|w| (w - z).norm() <= grouping_tol))
            .map(|(i, _)| i)
            .collect();
        match hits.split_first() {
            None => clusters.push(vec![z]),
            Some((&first, rest)) => {
                clusters[first].push(z);
                for &i in rest.iter().rev() {
                    let moved = clusters.remove(i);
                    clusters[first].extend(moved);
                }
            }
        }
    }
    let mut reps: Vec<Complex64> = clusters
        .iter()
        .map(|c| c.iter().sum::<Complex64>() / c.len() as f64)
        .collect();
    reps.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    reps
}

/// Distinct eigenvalues with their spectral projectors.
#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    eigenvalues: Vec<Complex64>,
    projectors: Vec<CMatrix>,
    grouping_tol: f64,
    defect: f64,
}

impl ProjectorFamily {
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Worst deviation from completeness and orthogonality seen at construction.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    /// Index of the eigenvalue closest to `lambda`, if within the grouping tolerance.
    pub fn position(&self, lambda: Complex64) -> Option<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z - lambda).norm()))
            .filter(|&(_, d)| d <= self.grouping_tol.max(1e-9 * (1.0 + lambda.norm())))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
    }

    /// Projector onto the eigenspace of `lambda`.
    pub fn projector_for(&self, lambda: Complex64) -> Option<&CMatrix> {
        self.position(lambda).map(|i| &self.projectors[i])
    }

    /// Reorders the family to follow `ordering`, which must be a permutation
    /// of the eigenvalues (matched within the grouping tolerance).
    pub fn reordered(&self, ordering: &[Complex64]) -> Result<ProjectorFamily> {
        if ordering.len() != self.len() {
            return Err(Error::BadOrdering);
        }
        let mut used = vec![false; self.len()];
        let mut eigenvalues = Vec::with_capacity(self.len());
        let mut projectors = Vec::with_capacity(self.len());
        for &lambda in ordering {
            let i = self.position(lambda).ok_or(Error::BadOrdering)?;
            if used[i] {
                return Err(Error::BadOrdering);
            }
            used[i] = true;
            eigenvalues.push(self.eigenvalues[i]);
            projectors.push(self.projectors[i].clone());
        }
        Ok(ProjectorFamily {
            eigenvalues,
            projectors,
            grouping_tol: self.grouping_tol,
            defect: self.defect,
        })
    }

    /// `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.projectors[0].dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(dim), |acc, (&l, p)| &acc + &p.scale(l))
    }
}

/// Spectral projectors by the product formula `P_i = Π_{j≠i} (b - λ_j)/(λ_i - λ_j)`.
pub fn spectral_projectors(b: &CMatrix, grouping_tol: f64) -> Result<ProjectorFamily> {
    let eigenvalues = distinct_eigenvalues(b, grouping_tol);
    let dim = b.dim();
    let id = CMatrix::identity(dim);
    let projectors: Vec<CMatrix> = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            eigenvalues
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(id.clone(), |acc, (_, &lj)| {
                    let factor = (b - &id.scale(lj)).scale(ONE / (li - lj));
                    &acc * &factor
                })
        })
        .collect();

    let sum = projectors.iter().fold(CMatrix::zeros(dim), |acc, p| &acc + p);
    let mut defect = residual(&sum, &id);
    for (i, pi) in projectors.iter().enumerate() {
        for (j, pj) in projectors.iter().enumerate() {
            let prod = pi * pj;
            let expected = if i == j { pi.clone() } else { CMatrix::zeros(dim) };
            defect = defect.max(residual(&prod, &expected));
        }
    }
    if !defect.is_finite() || defect > PROJECTOR_TOL {
        return Err(Error::NotDiagonalizable { residual: defect });
    }
    Ok(ProjectorFamily {
        eigenvalues,
        projectors,
        grouping_tol,
        defect,
    })
}

/// Least-squares fit of `target` against the span of `columns` (vectorized).
///
/// Returns the coefficients and the numerical rank of the column set.
/// Rank-deficient systems get the minimum-norm solution.
pub fn lstsq(columns: &[&CMatrix], target: &CMatrix) -> (Vec<Complex64>, usize) {
    let n = target.dim() * target.dim();
    let k = columns.len();
    let a = DMatrix::from_fn(n, k, |r, c| columns[c].entries()[r]);
    let rhs = DMatrix::from_fn(n, 1, |r, _| target.entries()[r]);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * 1e-10;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let coeffs = match svd.solve(&rhs, eps) {
        Ok(x) => x.iter().cloned().collect(),
        Err(_) => vec![ZERO; k],
    };
    (coeffs, rank)
}

/// Least-squares scalar `s` minimizing `|target - s·basis|`; `None` if `basis` is zero.
pub fn fit_scalar(basis: &CMatrix, target: &CMatrix) -> Option<Complex64> {
    let norm = basis.inner(basis);
    if norm.re == 0.0 {
        None
    } else {
        Some(basis.inner(target) / norm)
    }
}
