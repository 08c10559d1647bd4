//! Unitarity, crossing symmetry, second inversion, CPT invariance and
//! charge conservation checks on vertex weights.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{residual, scalar_residual, CMatrix};
use crate::report::{fmt_point, CheckReport, ReportBuilder, SampleGrid};
use crate::rmatrix::{ScalarFn, SpectralOperator, VertexWeights, WeightTable};

/// Crossing parameter, multipliers, bar involution and crossing factor `F(u)`.
#[derive(Clone)]
pub struct CrossingData {
    lambda: Complex64,
    multipliers: Vec<Complex64>,
    bar: Vec<usize>,
    factor: Option<ScalarFn>,
}

impl std::fmt::Debug for CrossingData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CrossingData")
            .field("lambda", &self.lambda)
            .field("multipliers", &self.multipliers)
            .field("bar", &self.bar)
            .field("factor", &self.factor.as_ref().map(|_| "F(u)"))
            .finish()
    }
}

/// Tolerance on `r(ī)·r(i) = 1`.
pub const MULTIPLIER_TOL: f64 = 1e-9;

impl CrossingData {
    pub fn new(lambda: Complex64, multipliers: Vec<Complex64>, bar: Vec<usize>) -> Result<Self> {
        let d = bar.len();
        if multipliers.len() != d {
            return Err(Error::BadCrossingData(format!(
                "{} multipliers for {d} states",
                multipliers.len()
            )));
        }
        if let Some(state) = multipliers.iter().position(|r| r.norm() == 0.0) {
            return Err(Error::BadMultipliers { state });
        }
        for (i, &b) in bar.iter().enumerate() {
            if b >= d || bar[b] != i {
                return Err(Error::BadCrossingData(format!("bar is not an involution at state {i}")));
            }
            let prod = multipliers[i] * multipliers[b];
            if (prod - Complex64::new(1.0, 0.0)).norm() > MULTIPLIER_TOL {
                return Err(Error::BadCrossingData(format!(
                    "r(bar({i}))*r({i}) = {prod}, expected 1"
                )));
            }
        }
        Ok(Self {
            lambda,
            multipliers,
            bar,
            factor: None,
        })
    }

    /// `r ≡ 1` with `bar(i) = d - 1 - i`.
    pub fn standard(lambda: Complex64, d: usize) -> Self {
        Self::new(lambda, vec![Complex64::new(1.0, 0.0); d], reflection_bar(d))
            .expect("reflection with unit multipliers is valid crossing data")
    }

    pub fn with_factor(mut self, f: ScalarFn) -> Self {
        self.factor = Some(f);
        self
    }

    /// Crossing data for `N(u)·Ř(u)`: `F(u)` picks up `N(u)/N(λ-u)`.
    pub fn renormalized(&self, n: ScalarFn) -> Self {
        let lambda = self.lambda;
        let old = self.factor.clone();
        let mut out = self.clone();
        out.factor = Some(std::sync::Arc::new(move |u| {
            let base = match &old {
                Some(f) => f(u)?,
                None => Complex64::new(1.0, 0.0),
            };
            Ok(base * n(u)? / n(lambda - u)?)
        }));
        out
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn multipliers(&self) -> &[Complex64] {
        &self.multipliers
    }

    pub fn bar(&self) -> &[usize] {
        &self.bar
    }

    fn factor_at(&self, u: Complex64) -> Result<Complex64> {
        match &self.factor {
            Some(f) => f(u),
            None => Ok(Complex64::new(1.0, 0.0)),
        }
    }
}

/// `bar(i) = d - 1 - i`, which is `1 - i` for two states.
pub fn reflection_bar(d: usize) -> Vec<usize> {
    (0..d).map(|i| d - 1 - i).collect()
}

fn tuples(d: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..d).flat_map(move |i| {
        (0..d).flat_map(move |k| (0..d).flat_map(move |j| (0..d).map(move |l| (i, k, j, l))))
    })
}

/// Relative max-entry residual between two flattened tensors.
fn flat_residual(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(1.0, f64::max);
    diff / scale
}

fn check_dim(op: &SpectralOperator, d: usize) -> Result<()> {
    if op.local_dim() != d {
        return Err(Error::DimMismatch {
            expected: op.local_dim(),
            got: d,
        });
    }
    Ok(())
}

/// Unitarity report with the sampled scalar `s(u) = ρ(u)ρ(-u)`.
#[derive(Clone, Debug)]
pub struct UnitarityReport {
    pub report: CheckReport,
    pub scalars: Vec<(Complex64, Complex64)>,
}

impl UnitarityReport {
    pub fn scalar_at(&self, u: Complex64) -> Option<Complex64> {
        self.scalars.iter().find(|(x, _)| (x - u).norm() < 1e-15).map(|&(_, s)| s)
    }
}

/// `Ř(-u)Ř(u) = s(u)·I`, with `s(u) = tr(Ř(-u)Ř(u))/d²`.
pub fn check_unitarity(r: &SpectralOperator, grid: &SampleGrid, tol: f64) -> Result<UnitarityReport> {
    let r = r.to_braided();
    let n = r.local_dim() * r.local_dim();
    let id = CMatrix::identity(n);
    let mut rep = ReportBuilder::new("unitarity", tol);
    let mut scalars = Vec::new();
    for &u in &grid.u_values {
        let what = fmt_point(u, None);
        if !grid.admit(r.poles(), &[u, -u], &what, &mut rep)? {
            continue;
        }
        let eval = (|| -> Result<(Complex64, f64)> {
            let m = &r.at(-u)? * &r.at(u)?;
            let s = m.trace() / n as f64;
            Ok((s, residual(&m, &id.scale(s))))
        })();
        if let Some((s, res)) = grid.settle(eval, &what, &mut rep)? {
            rep.sample(Some(u), None, res);
            scalars.push((u, s));
        }
    }
    // s(u) is even in u; compare the mirrored samples that were both evaluated.
    for &(u, s) in &scalars {
        if let Some(&(_, t)) = scalars.iter().find(|(w, _)| (w + u).norm() < 1e-15) {
            rep.sub("scalar even in u", scalar_residual(s, t));
        }
    }
    Ok(UnitarityReport {
        report: rep.finish(),
        scalars,
    })
}

/// `S^{ik}_{jl}(u) = [r(i)r(l)/(r(j)r(k))]^{1/2} F(u) S^{jl}_{k̄ī}(λ-u)` over all
/// index tuples and grid points. The square root is the principal branch.
pub fn check_crossing(r: &SpectralOperator, cd: &CrossingData, grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    let d = r.local_dim();
    check_dim(r, cd.bar.len())?;
    let w = VertexWeights::new(r.clone());
    let rr = &cd.multipliers;
    let bar = &cd.bar;
    let mut rep = ReportBuilder::new("crossing", tol);
    rep.param("lambda", cd.lambda);
    for &u in &grid.u_values {
        let what = fmt_point(u, None);
        let crossed = cd.lambda - u;
        if !grid.admit(w.operator().poles(), &[u, crossed], &what, &mut rep)? {
            continue;
        }
        let eval = (|| -> Result<(WeightTable, WeightTable, Complex64, Complex64)> {
            Ok((w.at(u)?, w.at(crossed)?, cd.factor_at(u)?, cd.factor_at(crossed)?))
        })();
        let Some((a, b, f, f_crossed)) = grid.settle(eval, &what, &mut rep)? else {
            continue;
        };
        let mut lhs = Vec::with_capacity(d.pow(4));
        let mut rhs = Vec::with_capacity(d.pow(4));
        for (i, k, j, l) in tuples(d) {
            let ratio = rr[i] * rr[l] / (rr[j] * rr[k]);
            if ratio.im == 0.0 && ratio.re < 0.0 {
                rep.note("a multiplier ratio lies on the negative real axis; principal square root used");
            }
            lhs.push(a.get(i, k, j, l));
            rhs.push(ratio.sqrt() * f * b.get(j, l, bar[k], bar[i]));
        }
        rep.sample(Some(u), None, flat_residual(&lhs, &rhs));
        rep.sub(
            "F(u)F(lambda-u) = 1",
            scalar_residual(f * f_crossed, Complex64::new(1.0, 0.0)),
        );
    }
    Ok(rep.finish())
}

#[derive(Clone, Debug)]
pub struct SecondInversionReport {
    pub report: CheckReport,
    /// Least-squares scalar fitted at each sampled `u`.
    pub scalars: Vec<(Complex64, Complex64)>,
    /// Unitarity scalar `tr(Ř(-u)Ř(u))/d²` at the same `u`, when admissible.
    pub unitarity_scalars: Vec<(Complex64, Option<Complex64>)>,
}

/// `Σ_{p,q} S^{kp}_{ql}(λ+u) S^{jq}_{pi}(λ-u) r(q)r(p)/(r(j)r(k)) = s(u) δ_ik δ_jl`.
///
/// `s(u)` is fitted by least squares over the `δ_ik δ_jl` positions.
pub fn check_second_inversion(
    r: &SpectralOperator,
    cd: &CrossingData,
    grid: &SampleGrid,
    tol: f64,
) -> Result<SecondInversionReport> {
    let d = r.local_dim();
    check_dim(r, cd.bar.len())?;
    let w = VertexWeights::new(r.clone());
    let rr = &cd.multipliers;
    let mut rep = ReportBuilder::new("second-inversion", tol);
    let mut scalars = Vec::new();
    let mut unitarity_scalars = Vec::new();
    for &u in &grid.u_values {
        let what = fmt_point(u, None);
        let (plus, minus) = (cd.lambda + u, cd.lambda - u);
        if !grid.admit(w.operator().poles(), &[plus, minus], &what, &mut rep)? {
            continue;
        }
        let eval = (|| -> Result<(WeightTable, WeightTable)> { Ok((w.at(plus)?, w.at(minus)?)) })();
        let Some((a, b)) = grid.settle(eval, &what, &mut rep)? else {
            continue;
        };
        let mut lhs = Vec::with_capacity(d.pow(4));
        let mut pattern = Vec::with_capacity(d.pow(4));
        for (i, j, k, l) in tuples(d) {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..d {
                for q in 0..d {
                    acc += a.get(k, p, q, l) * b.get(j, q, p, i) * rr[q] * rr[p] / (rr[j] * rr[k]);
                }
            }
            lhs.push(acc);
            pattern.push(i == k && j == l);
        }
        let diag: Vec<Complex64> = lhs.iter().zip(&pattern).filter(|(_, &m)| m).map(|(z, _)| *z).collect();
        let s = diag.iter().sum::<Complex64>() / diag.len() as f64;
        let target: Vec<Complex64> = pattern
            .iter()
            .map(|&m| if m { s } else { Complex64::new(0.0, 0.0) })
            .collect();
        rep.sample(Some(u), None, flat_residual(&lhs, &target));
        scalars.push((u, s));

        let unit = if r.poles().iter().all(|p| (p - u).norm() > grid.pole_margin && (p + u).norm() > grid.pole_margin) {
            let rb = r.to_braided();
            match (rb.at(-u), rb.at(u)) {
                (Ok(x), Ok(y)) => Some((&x * &y).trace() / (d * d) as f64),
                _ => None,
            }
        } else {
            None
        };
        if let Some(su) = unit {
            if scalar_residual(s, su) > tol {
                rep.note(format!("at u={u} the fitted scalar {s} differs from the unitarity scalar {su}"));
            }
        }
        unitarity_scalars.push((u, unit));
    }
    Ok(SecondInversionReport {
        report: rep.finish(),
        scalars,
        unitarity_scalars,
    })
}

/// The three reflection symmetries
/// `S^{ik}_{jl} = S^{īk̄}_{j̄l̄}` (C), `= S^{jl}_{ik}` (P), `= S^{ki}_{lj}` (T).
pub fn check_cpt(r: &SpectralOperator, bar: &[usize], grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    let d = r.local_dim();
    if bar.len() != d || bar.iter().enumerate().any(|(i, &b)| b >= d || bar[b] != i) {
        return Err(Error::BadCrossingData("bar must be an involution on the local states".into()));
    }
    let w = VertexWeights::new(r.clone());
    let mut rep = ReportBuilder::new("cpt", tol);
    for &u in &grid.u_values {
        let what = fmt_point(u, None);
        if !grid.admit(w.operator().poles(), &[u], &what, &mut rep)? {
            continue;
        }
        let Some(t) = grid.settle(w.at(u), &what, &mut rep)? else {
            continue;
        };
        let (mut base, mut c, mut p, mut tt) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (i, k, j, l) in tuples(d) {
            base.push(t.get(i, k, j, l));
            c.push(t.get(bar[i], bar[k], bar[j], bar[l]));
            p.push(t.get(j, l, i, k));
            tt.push(t.get(k, i, l, j));
        }
        let (rc, rp, rt) = (flat_residual(&base, &c), flat_residual(&base, &p), flat_residual(&base, &tt));
        rep.sub("C", rc);
        rep.sub("P", rp);
        rep.sub("T", rt);
        rep.sample(Some(u), None, rc.max(rp).max(rt));
    }
    Ok(rep.finish())
}

/// Largest `|S^{ik}_{jl}(u)|` over tuples with `q(i)+q(j) ≠ q(k)+q(l)`.
pub fn check_charge_conservation(
    r: &SpectralOperator,
    charge: &[i64],
    grid: &SampleGrid,
    tol: f64,
) -> Result<CheckReport> {
    let d = r.local_dim();
    if charge.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: charge.len(),
        });
    }
    let w = VertexWeights::new(r.clone());
    let mut rep = ReportBuilder::new("charge-conservation", tol);
    for &u in &grid.u_values {
        let what = fmt_point(u, None);
        if !grid.admit(w.operator().poles(), &[u], &what, &mut rep)? {
            continue;
        }
        let Some(t) = grid.settle(w.at(u), &what, &mut rep)? else {
            continue;
        };
        let worst = tuples(d)
            .filter(|&(i, k, j, l)| charge[i] + charge[j] != charge[k] + charge[l])
            .map(|(i, k, j, l)| t.get(i, k, j, l).norm())
            .fold(0.0, f64::max);
        rep.sample(Some(u), None, worst);
    }
    Ok(rep.finish())
}

/// `q(a) = a`.
pub fn natural_charge(d: usize) -> Vec<i64> {
    (0..d as i64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::permutation_operator;
    use crate::rmatrix::scalar_fn;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn yang() -> SpectralOperator {
        let p = permutation_operator(2);
        SpectralOperator::from_fn(2, "I+uP", vec![], move |u| Ok(&CMatrix::identity(4) + &p.scale(u)))
    }

    /// `(k-u)I + uE` with `E = (|01⟩+|10⟩)(⟨01|+⟨10|)`, a TL generator at δ = 2.
    fn tl_plus(k: f64) -> SpectralOperator {
        let e = CMatrix::from_real(
            4,
            &[0., 0., 0., 0., 0., 1., 1., 0., 0., 1., 1., 0., 0., 0., 0., 0.],
        )
        .unwrap();
        SpectralOperator::from_fn(2, "tl+", vec![], move |u| {
            Ok(&CMatrix::identity(4).scale(c(k) - u) + &e.scale(u))
        })
    }

    #[test]
    fn yang_unitarity_scalar() {
        let rep = check_unitarity(&yang(), &SampleGrid::default(), 1e-13).unwrap();
        assert!(rep.report.pass);
        for &(u, s) in &rep.scalars {
            assert!((s - (c(1.0) - u * u)).norm() < 1e-13);
        }
    }

    #[test]
    fn identity_unitarity() {
        let op = SpectralOperator::constant(CMatrix::identity(4), 2, "I").unwrap();
        let rep = check_unitarity(&op, &SampleGrid::default(), 1e-13).unwrap();
        assert_eq!(rep.report.max_residual, 0.0);
        assert!(rep.scalars.iter().all(|&(_, s)| s == c(1.0)));
    }

    #[test]
    fn crossing_data_validation() {
        assert!(matches!(
            CrossingData::new(c(1.0), vec![c(0.0), c(1.0)], vec![1, 0]),
            Err(Error::BadMultipliers { state: 0 })
        ));
        assert!(CrossingData::new(c(1.0), vec![c(2.0), c(2.0)], vec![1, 0]).is_err());
        assert!(CrossingData::new(c(1.0), vec![c(1.0), c(1.0)], vec![1, 1]).is_err());
        assert!(CrossingData::new(c(1.0), vec![c(2.0), c(0.5)], vec![1, 0]).is_ok());
    }

    #[test]
    fn one_state_model_crosses_trivially() {
        let op = SpectralOperator::constant(CMatrix::identity(1), 1, "1").unwrap();
        let cd = CrossingData::new(c(0.7), vec![c(1.0)], vec![0]).unwrap();
        let rep = check_crossing(&op, &cd, &SampleGrid::default(), 1e-12).unwrap();
        assert!(rep.pass);
        let si = check_second_inversion(&op, &cd, &SampleGrid::default(), 1e-12).unwrap();
        assert!(si.report.pass);
        assert!(si.scalars.iter().all(|&(_, s)| s == c(1.0)));
    }

    #[test]
    fn tl_plus_crosses_at_k() {
        let k = 2.0;
        let cd = CrossingData::standard(c(k), 2);
        let rep = check_crossing(&tl_plus(k), &cd, &SampleGrid::default(), 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        let bad = cd.clone().with_factor(scalar_fn(|u| c(1.0) + u));
        let rep = check_crossing(&tl_plus(k), &bad, &SampleGrid::default(), 1e-9).unwrap();
        assert!(!rep.pass);
        assert!(!rep.sub("F(u)F(lambda-u) = 1").unwrap().pass);
    }

    #[test]
    fn second_inversion_matches_unitarity_for_tl_plus() {
        let k = 2.0;
        let cd = CrossingData::standard(c(k), 2);
        let si = check_second_inversion(&tl_plus(k), &cd, &SampleGrid::default(), 1e-12).unwrap();
        assert!(si.report.pass, "{:?}", si.report);
        for (&(u, s), &(_, su)) in si.scalars.iter().zip(&si.unitarity_scalars) {
            assert!((s - su.unwrap()).norm() < 1e-12);
            assert!((s - (c(k * k) - u * u)).norm() < 1e-12);
        }
    }

    #[test]
    fn negative_ratio_is_noted() {
        let cd = CrossingData::new(c(2.0), vec![Complex64::i(), -Complex64::i()], vec![1, 0]).unwrap();
        let rep = check_crossing(&tl_plus(2.0), &cd, &SampleGrid::default(), 1e-9).unwrap();
        assert!(rep.notes.iter().any(|n| n.contains("negative real axis")));
    }

    #[test]
    fn cpt_examples() {
        let bar = reflection_bar(2);
        let id = SpectralOperator::constant(CMatrix::identity(4), 2, "I").unwrap();
        assert!(check_cpt(&id, &bar, &SampleGrid::default(), 1e-13).unwrap().pass);
        let rep = check_cpt(&yang(), &bar, &SampleGrid::default(), 1e-13).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.breakdown.len(), 3);
        let skew = SpectralOperator::constant(CMatrix::unit(4, 0, 1), 2, "E01").unwrap();
        assert!(!check_cpt(&skew, &bar, &SampleGrid::default(), 1e-9).unwrap().pass);
    }

    #[test]
    fn charge_examples() {
        let q = natural_charge(2);
        let rep = check_charge_conservation(&yang(), &q, &SampleGrid::default(), 1e-13).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.max_residual, 0.0);
        let ones = SpectralOperator::constant(CMatrix::from_real(4, &[1.0; 16]).unwrap(), 2, "J").unwrap();
        let rep = check_charge_conservation(&ones, &q, &SampleGrid::default(), 1e-9).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.max_residual, 1.0);
    }
}
