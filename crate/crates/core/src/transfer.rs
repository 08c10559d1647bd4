//! Row-to-row transfer matrices on a periodic chain and their commutation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{residual, CMatrix};
use crate::report::{fmt_point, CheckReport, ReportBuilder, SampleGrid};
use crate::rmatrix::{VertexWeights, WeightTable};

/// Largest quantum space handled, `d^N ≤ 4096`.
pub const MAX_STATES: usize = 4096;

#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub chain_len: usize,
    pub local_dim: usize,
    pub u: Complex64,
    pub matrix: CMatrix,
}

fn state_count(d: usize, n: usize) -> Result<usize> {
    match d.checked_pow(n as u32) {
        Some(s) if s <= MAX_STATES => Ok(s),
        Some(s) => Err(Error::SizeGuard { states: s, limit: MAX_STATES }),
        None => Err(Error::SizeGuard {
            states: usize::MAX,
            limit: MAX_STATES,
        }),
    }
}

/// Digits of `index` in base `d`, site 1 most significant.
fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn build(t: &WeightTable, n: usize, states: usize) -> CMatrix {
    let d = t.local_dim();
    let cols: Vec<Vec<usize>> = (0..states).map(|s| digits(s, d, n)).collect();
    CMatrix::from_fn(states, |row, col| {
        let (js, is) = (&cols[row], &cols[col]);
        // Trace over the auxiliary space of Π_s M_s with M_s[a][b] = S^{ab}_{i_s j_s}.
        let mut acc = CMatrix::identity(d);
        for s in 0..n {
            let m = CMatrix::from_fn(d, |a, b| t.get(a, b, is[s], js[s]));
            acc = &acc * &m;
        }
        acc.trace()
    })
}

/// `T(u)[J, I] = Σ_a Π_s S^{a_s a_{s+1}}_{i_s j_s}(u)` with `a_{N+1} = a_1`.
///
/// Under the weight convention `Ř` sends `|i j⟩` to `|l k⟩`, so in
/// `S^{ik}_{jl}` the auxiliary line runs `i → k` and the quantum line `j → l`.
pub fn transfer_matrix(w: &VertexWeights, n: usize, u: Complex64) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::SiteOutOfRange { site: 0, chain_len: 0 });
    }
    let d = w.local_dim();
    let states = state_count(d, n)?;
    let t = w.at(u)?;
    Ok(TransferMatrix {
        chain_len: n,
        local_dim: d,
        u,
        matrix: build(&t, n, states),
    })
}

/// `[T(u), T(v)] = 0` over every grid pair.
pub fn check_transfer_commutation(w: &VertexWeights, n: usize, grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    let d = w.local_dim();
    state_count(d, n)?;
    let mut rep = ReportBuilder::new("transfer-commutation", tol);
    rep.param("N", Complex64::new(n as f64, 0.0));
    let mut cache: Vec<(Complex64, Option<CMatrix>)> = Vec::new();
    let mut lookup = |u: Complex64, rep: &mut ReportBuilder| -> Result<Option<CMatrix>> {
        if let Some((_, m)) = cache.iter().find(|(x, _)| *x == u) {
            return Ok(m.clone());
        }
        let what = fmt_point(u, None);
        let m = if grid.admit(w.operator().poles(), &[u], &what, rep)? {
            grid.settle(transfer_matrix(w, n, u).map(|t| t.matrix), &what, rep)?
        } else {
            None
        };
        cache.push((u, m.clone()));
        Ok(m)
    };
    for (u, v) in grid.pairs() {
        let (Some(a), Some(b)) = (lookup(u, &mut rep)?, lookup(v, &mut rep)?) else {
            continue;
        };
        rep.sample(Some(u), Some(v), residual(&(&a * &b), &(&b * &a)));
    }
    Ok(rep.finish())
}
