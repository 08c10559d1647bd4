//! Braid relations and the TL, BMW′ and 4-CB skein relations, checked on
//! the smallest chain where each relation is nontrivial.

use std::cell::OnceCell;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{embed_pair, fit_scalar, lstsq, residual, residual_zero, CMatrix, SINGULAR_RCOND};
use crate::report::{CheckReport, ReportBuilder};

/// A two-site generator embedded at every site of a chain of length `m`.
#[derive(Debug)]
pub struct ChainFamily {
    local_dim: usize,
    chain_len: usize,
    generator: CMatrix,
    sites: Vec<OnceCell<CMatrix>>,
}

impl ChainFamily {
    pub fn new(generator: CMatrix, local_dim: usize, chain_len: usize) -> Result<Self> {
        if generator.dim() != local_dim * local_dim {
            return Err(Error::DimMismatch {
                expected: local_dim * local_dim,
                got: generator.dim(),
            });
        }
        if chain_len < 2 {
            return Err(Error::SiteOutOfRange { site: 1, chain_len });
        }
        Ok(Self {
            local_dim,
            chain_len,
            generator,
            sites: (1..chain_len).map(|_| OnceCell::new()).collect(),
        })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn chain_len(&self) -> usize {
        self.chain_len
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    /// `M_i` for `1 ≤ i ≤ m-1`.
    pub fn site(&self, i: usize) -> Result<&CMatrix> {
        let cell = i
            .checked_sub(1)
            .and_then(|k| self.sites.get(k))
            .ok_or(Error::SiteOutOfRange {
                site: i,
                chain_len: self.chain_len,
            })?;
        if cell.get().is_none() {
            let m = embed_pair(&self.generator, i, self.chain_len, self.local_dim)?;
            let _ = cell.set(m);
        }
        Ok(cell.get().expect("site was just embedded"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TLParams {
    pub delta: Complex64,
}

/// `l` and `m` are `None` when the relations leave them undetermined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BMWParams {
    pub l: Option<Complex64>,
    pub m: Option<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkeinCoeffs {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta4: Complex64,
    pub residual: f64,
    /// False when `{I, E, G, G⁻¹}` are linearly dependent.
    pub unique: bool,
}

fn require_invertible(g: &CMatrix) -> Result<CMatrix> {
    let rcond = g.rcond();
    if !(rcond >= SINGULAR_RCOND) {
        return Err(Error::Singular { rcond });
    }
    g.inverse()
}

fn constant_verdict(rep: &mut ReportBuilder, worst: f64) {
    rep.sample(None, None, worst);
}

fn braid_subs(g: &CMatrix, d: usize, rep: &mut ReportBuilder, prefix: &str) -> Result<f64> {
    let three = ChainFamily::new(g.clone(), d, 3)?;
    let (g1, g2) = (three.site(1)?, three.site(2)?);
    let braid = residual(&(&(g1 * g2) * g1), &(&(g2 * g1) * g2));
    let four = ChainFamily::new(g.clone(), d, 4)?;
    let far = residual_zero(&four.site(1)?.commutator(four.site(3)?));
    rep.sub(&format!("{prefix}G1 G2 G1 = G2 G1 G2"), braid);
    rep.sub(&format!("{prefix}[G1, G3] = 0"), far);
    Ok(braid.max(far))
}

/// `G₁G₂G₁ = G₂G₁G₂` on three sites and `[G₁, G₃] = 0` on four.
pub fn check_braid_relations(g: &CMatrix, d: usize, tol: f64) -> Result<CheckReport> {
    require_invertible(g)?;
    let mut rep = ReportBuilder::new("braid", tol);
    let worst = braid_subs(g, d, &mut rep, "")?;
    constant_verdict(&mut rep, worst);
    Ok(rep.finish())
}

/// Fits `δ` and records the TL residuals. Returns `None` for `e = 0`, where
/// every relation holds trivially and `δ` is undetermined.
fn tl_subs(e: &CMatrix, d: usize, rep: &mut ReportBuilder, prefix: &str) -> Result<(Option<Complex64>, f64)> {
    let e2 = e * e;
    let delta = fit_scalar(e, &e2);
    let square = match delta {
        Some(delta) => residual(&e2, &e.scale(delta)),
        None => residual_zero(&e2),
    };
    let three = ChainFamily::new(e.clone(), d, 3)?;
    let (e1, e2s) = (three.site(1)?, three.site(2)?);
    let e121 = &(e1 * e2s) * e1;
    let e212 = &(e2s * e1) * e2s;
    let four = ChainFamily::new(e.clone(), d, 4)?;
    let far = residual_zero(&four.site(1)?.commutator(four.site(3)?));
    let r121 = residual(&e121, e1);
    let r212 = residual(&e212, e2s);
    rep.sub(&format!("{prefix}E^2 = delta E"), square);
    rep.sub(&format!("{prefix}E1 E2 E1 = E1"), r121);
    rep.sub(&format!("{prefix}E2 E1 E2 = E2"), r212);
    rep.sub(&format!("{prefix}[E1, E3] = 0"), far);
    // The variant with E_{i±1} on the right is measured for reference only.
    rep.informational(&format!("{prefix}E1 E2 E1 = E2 (printed variant)"), residual(&e121, e2s));
    rep.informational(&format!("{prefix}E2 E1 E2 = E1 (printed variant)"), residual(&e212, e1));
    Ok((delta, square.max(r121).max(r212).max(far)))
}

/// TL relations `E² = δE`, `E_iE_{i±1}E_i = E_i` and `[E₁, E₃] = 0`.
///
/// `δ` is the least-squares ratio of `E²` against `E`.
pub fn check_temperley_lieb(e: &CMatrix, d: usize, tol: f64) -> Result<(TLParams, CheckReport)> {
    if e.is_zero(0.0) {
        return Err(Error::ZeroGenerator);
    }
    let mut rep = ReportBuilder::new("temperley-lieb", tol);
    let (delta, worst) = tl_subs(e, d, &mut rep, "")?;
    let delta = delta.expect("nonzero generator has a fitted delta");
    rep.param("delta", delta);
    constant_verdict(&mut rep, worst);
    Ok((TLParams { delta }, rep.finish()))
}

pub const SKEIN: &str = "m(E - I) = G^-1 - G";
pub const G_E_ABSORB: &str = "G E = E G = l^-1 E";

/// Like [`check_bmw_prime`], but an inconsistent `l` or `m` fit is recorded
/// as a failing relation instead of an error.
pub fn bmw_prime_report(g: &CMatrix, e: &CMatrix, d: usize, tol: f64) -> Result<(BMWParams, CheckReport)> {
    let gi = require_invertible(g)?;
    if e.dim() != g.dim() {
        return Err(Error::DimMismatch {
            expected: g.dim(),
            got: e.dim(),
        });
    }
    let n = g.dim();
    let id = CMatrix::identity(n);
    let mut rep = ReportBuilder::new("bmw-prime", tol);

    let e_minus = &*e - &id;
    let skein_rhs = &gi - g;
    let m = fit_scalar(&e_minus, &skein_rhs);
    let skein = match m {
        Some(m) => residual(&e_minus.scale(m), &skein_rhs),
        None => residual_zero(&skein_rhs),
    };
    if m.is_none() {
        rep.note("skein relation is 0 = 0 in m; m is indeterminate");
    }

    let (ge, eg) = (g * e, e * g);
    let norm = e.inner(e);
    let linv = (norm.re > 0.0).then(|| (e.inner(&ge) + e.inner(&eg)) / (norm * 2.0));
    let l = match linv {
        Some(x) if x.norm() > 0.0 => Some(x.inv()),
        Some(_) => {
            rep.note("l^-1 fits to zero; l is undefined");
            None
        }
        None => {
            rep.note("E = 0; l is indeterminate");
            None
        }
    };
    let absorb = match linv {
        Some(x) => residual(&ge, &e.scale(x)).max(residual(&eg, &e.scale(x))),
        None => residual_zero(&ge).max(residual_zero(&eg)),
    };

    let three = |m: &CMatrix| ChainFamily::new(m.clone(), d, 3);
    let gf = three(g)?;
    let gif = three(&gi)?;
    let ef = three(e)?;
    let (g1, g2) = (gf.site(1)?, gf.site(2)?);
    let gi1 = gif.site(1)?;
    let (e1, e2) = (ef.site(1)?, ef.site(2)?);
    let e1e2 = e1 * e2;

    let lifted = match (l, linv) {
        (Some(l), _) => residual(&(&(e1 * g2) * e1), &e1.scale(l)),
        (None, None) => residual_zero(&(&(e1 * g2) * e1)),
        (None, Some(_)) => f64::INFINITY,
    };

    rep.sub(SKEIN, skein);
    rep.sub("G2 G1 E2 = E1 E2", residual(&(&(g2 * g1) * e2), &e1e2));
    rep.sub("E1 G2 G1 = E1 E2", residual(&(&(e1 * g2) * g1), &e1e2));
    rep.sub("G2 E1 G2 = G1^-1 E2 G1^-1", residual(&(&(g2 * e1) * g2), &(&(gi1 * e2) * gi1)));
    rep.sub("G2 E1 E2 = G1^-1 E2", residual(&(g2 * &e1e2), &(gi1 * e2)));
    rep.sub(G_E_ABSORB, absorb);
    rep.sub("E1 G2 E1 = l E1", lifted);
    tl_subs(e, d, &mut rep, "TL: ")?;
    braid_subs(g, d, &mut rep, "braid: ")?;

    if let Some(l) = l {
        rep.param("l", l);
    }
    if let Some(m) = m {
        rep.param("m", m);
    }
    constant_verdict(&mut rep, 0.0);
    Ok((BMWParams { l, m }, rep.finish()))
}

/// BMW′ relations for the pair `(G, E)`, with `l` fitted from
/// `GE = EG = l⁻¹E` and `m` from the skein relation.
pub fn check_bmw_prime(g: &CMatrix, e: &CMatrix, d: usize, tol: f64) -> Result<(BMWParams, CheckReport)> {
    let (params, report) = bmw_prime_report(g, e, d, tol)?;
    for (name, label) in [(G_E_ABSORB, "l"), (SKEIN, "m")] {
        let sub = report.sub(name).expect("relation is always recorded");
        if sub.max_residual > tol {
            return Err(Error::InconsistentParams {
                name: label,
                residual: sub.max_residual,
            });
        }
    }
    Ok((params, report))
}

/// Least-squares fit of `G² = α + βE + γG + δ₄G⁻¹`.
///
/// When the four terms are dependent and `E` adds nothing to the span of
/// `{I, G, G⁻¹}`, `β` is pinned to zero so the three-term relation is
/// reported; otherwise the minimum-norm solution is returned.
pub fn fit_skein_4cb(g: &CMatrix, e: &CMatrix) -> Result<SkeinCoeffs> {
    let gi = require_invertible(g)?;
    let id = CMatrix::identity(g.dim());
    let g2 = g * g;
    let (full, rank) = lstsq(&[&id, e, g, &gi], &g2);
    let (alpha, beta, gamma, delta4) = if rank == 4 {
        (full[0], full[1], full[2], full[3])
    } else {
        let (three, rank3) = lstsq(&[&id, g, &gi], &g2);
        if rank3 == rank {
            (three[0], Complex64::new(0.0, 0.0), three[1], three[2])
        } else {
            (full[0], full[1], full[2], full[3])
        }
    };
    let fitted = &(&(&id.scale(alpha) + &e.scale(beta)) + &g.scale(gamma)) + &gi.scale(delta4);
    Ok(SkeinCoeffs {
        alpha,
        beta,
        gamma,
        delta4,
        residual: residual(&g2, &fitted),
        unique: rank == 4,
    })
}
