//! Spectral operators `Ř(u)` / `R(u)`, their vertex-weight view, and the
//! Yang–Baxter checks in braided and operator form.
//!
//! Weight convention: the entry of `Ř(u)` at row `p·d + m`, column `k·d + l`
//! is the Boltzmann weight `S^{km}_{lp}(u)`, i.e. `Ř = Σ S^{km}_{lp} E_{pk} ⊗ E_{ml}`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exprfn::{evaluate, Bindings, ExprError, ExprNode};
use crate::linalg::{embed_pair, permutation_operator, residual, CMatrix};
use crate::report::{fmt_point, CheckReport, ReportBuilder, SampleGrid};

/// Evaluation at a declared pole closer than this is refused.
pub const POLE_TOL: f64 = 1e-9;

/// A scalar function of the spectral parameter.
pub type ScalarFn = Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>;

type MatrixFn = Arc<dyn Fn(Complex64) -> Result<CMatrix> + Send + Sync>;

/// Wraps a closure as a [`ScalarFn`].
pub fn scalar_fn(f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(move |u| Ok(f(u)))
}

/// Which equation the operator is meant to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorForm {
    /// `Ř(u)`, checked with `Ř₁(u)Ř₂(u+v)Ř₁(v) = Ř₂(v)Ř₁(u+v)Ř₂(u)`.
    Braided,
    /// `R(u) = P·Ř(u)`, checked with `R₁₂(u)R₁₃(u+v)R₂₃(v) = R₂₃(v)R₁₃(u+v)R₁₂(u)`.
    Plain,
}

/// A matrix-valued function `u ↦ M(u)` on `V ⊗ V` with declared poles.
#[derive(Clone)]
pub struct SpectralOperator {
    local_dim: usize,
    form: OperatorForm,
    poles: Vec<Complex64>,
    label: String,
    eval: MatrixFn,
}

impl fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralOperator")
            .field("label", &self.label)
            .field("local_dim", &self.local_dim)
            .field("form", &self.form)
            .field("poles", &self.poles)
            .finish()
    }
}

impl SpectralOperator {
    pub fn from_fn(
        local_dim: usize,
        label: impl Into<String>,
        poles: Vec<Complex64>,
        f: impl Fn(Complex64) -> Result<CMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self {
            local_dim,
            form: OperatorForm::Braided,
            poles,
            label: label.into(),
            eval: Arc::new(f),
        }
    }

    /// A `u`-independent operator.
    pub fn constant(m: CMatrix, local_dim: usize, label: impl Into<String>) -> Result<Self> {
        if m.dim() != local_dim * local_dim {
            return Err(Error::DimMismatch {
                expected: local_dim * local_dim,
                got: m.dim(),
            });
        }
        Ok(Self::from_fn(local_dim, label, Vec::new(), move |_| Ok(m.clone())))
    }

    /// An operator whose row-major entries are expressions in `u` and the
    /// bound constants.
    pub fn from_expressions(
        local_dim: usize,
        entries: Vec<ExprNode>,
        constants: Bindings,
        poles: Vec<Complex64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = local_dim * local_dim;
        if entries.len() != n * n {
            return Err(Error::BadShape {
                expected: n * n,
                got: entries.len(),
            });
        }
        let entries = Arc::new(entries);
        Ok(Self::from_fn(local_dim, label, poles, move |u| {
            let mut env = constants.clone();
            env.set("u", u)?;
            let values = entries
                .iter()
                .map(|e| evaluate(e, &env))
                .collect::<Result<Vec<_>, ExprError>>()?;
            CMatrix::new(n, values)
        }))
    }

    pub fn with_form(mut self, form: OperatorForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn form(&self) -> OperatorForm {
        self.form
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates at `u`, refusing declared poles. Divisions near zero inside
    /// expression entries surface as [`Error::PoleClash`] too.
    pub fn at(&self, u: Complex64) -> Result<CMatrix> {
        if let Some(p) = self.poles.iter().find(|&&p| (p - u).norm() <= POLE_TOL) {
            return Err(Error::PoleClash {
                u,
                context: Some(format!("declared pole {p} of {}", self.label)),
            });
        }
        let m = (self.eval)(u).map_err(|e| match e {
            Error::Expr(ExprError::DivisionNearZero { span }) => Error::PoleClash {
                u,
                context: Some(format!("division near zero at {span} in {}", self.label)),
            },
            other => other,
        })?;
        let n = self.local_dim * self.local_dim;
        if m.dim() != n {
            return Err(Error::DimMismatch { expected: n, got: m.dim() });
        }
        Ok(m)
    }

    pub fn at_real(&self, u: f64) -> Result<CMatrix> {
        self.at(Complex64::new(u, 0.0))
    }

    /// `N(u)·M(u)`; the poles are kept, zeros of `N` are the caller's concern.
    pub fn scaled(&self, n: ScalarFn) -> Self {
        let inner = self.eval.clone();
        Self {
            local_dim: self.local_dim,
            form: self.form,
            poles: self.poles.clone(),
            label: format!("N(u)*{}", self.label),
            eval: Arc::new(move |u| Ok(inner(u)?.scale(n(u)?))),
        }
    }

    /// Left-multiplies by the swap and flips the form: `R = P·Ř` and `Ř = P·R`.
    pub fn swapped(&self) -> Self {
        let inner = self.eval.clone();
        let p = permutation_operator(self.local_dim);
        Self {
            local_dim: self.local_dim,
            form: match self.form {
                OperatorForm::Braided => OperatorForm::Plain,
                OperatorForm::Plain => OperatorForm::Braided,
            },
            poles: self.poles.clone(),
            label: format!("P*{}", self.label),
            eval: Arc::new(move |u| Ok(&p * &inner(u)?)),
        }
    }

    /// `R(u)` for a braided operator (identity on the form if already plain).
    pub fn to_plain(&self) -> Self {
        match self.form {
            OperatorForm::Braided => self.swapped(),
            OperatorForm::Plain => self.clone(),
        }
    }

    /// `Ř(u)` for a plain operator (identity on the form if already braided).
    pub fn to_braided(&self) -> Self {
        match self.form {
            OperatorForm::Plain => self.swapped(),
            OperatorForm::Braided => self.clone(),
        }
    }
}

/// Boltzmann weights of a braided operator at one spectral parameter.
#[derive(Clone, Debug)]
pub struct WeightTable {
    d: usize,
    matrix: CMatrix,
}

impl WeightTable {
    pub fn new(matrix: CMatrix, d: usize) -> Result<Self> {
        if matrix.dim() != d * d {
            return Err(Error::DimMismatch {
                expected: d * d,
                got: matrix.dim(),
            });
        }
        Ok(Self { d, matrix })
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    /// `S^{ik}_{jl}`: upper indices `i, k`, lower indices `j, l`.
    pub fn get(&self, i: usize, k: usize, j: usize, l: usize) -> Complex64 {
        self.matrix.get(l * self.d + k, i * self.d + j)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Index view `S^{ik}_{jl}(u)` of a braided operator.
#[derive(Clone, Debug)]
pub struct VertexWeights {
    op: SpectralOperator,
}

impl VertexWeights {
    pub fn new(op: SpectralOperator) -> Self {
        Self { op: op.to_braided() }
    }

    pub fn operator(&self) -> &SpectralOperator {
        &self.op
    }

    pub fn local_dim(&self) -> usize {
        self.op.local_dim()
    }

    pub fn at(&self, u: Complex64) -> Result<WeightTable> {
        WeightTable::new(self.op.at(u)?, self.op.local_dim())
    }

    pub fn weight(&self, i: usize, k: usize, j: usize, l: usize, u: Complex64) -> Result<Complex64> {
        Ok(self.at(u)?.get(i, k, j, l))
    }
}

pub fn operator_to_weights(op: &SpectralOperator) -> VertexWeights {
    VertexWeights::new(op.clone())
}

/// Assembles a braided operator from a weight function `S(i, k, j, l, u)`.
pub fn weights_to_operator(
    local_dim: usize,
    label: impl Into<String>,
    poles: Vec<Complex64>,
    weight: impl Fn(usize, usize, usize, usize, Complex64) -> Result<Complex64> + Send + Sync + 'static,
) -> SpectralOperator {
    let d = local_dim;
    SpectralOperator::from_fn(d, label, poles, move |u| {
        let n = d * d;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    for l in 0..d {
                        entries[(l * d + k) * n + (i * d + j)] = weight(i, k, j, l, u)?;
                    }
                }
            }
        }
        CMatrix::new(n, entries)
    })
}

fn three_site(r: &CMatrix, d: usize) -> Result<(CMatrix, CMatrix)> {
    Ok((embed_pair(r, 1, 3, d)?, embed_pair(r, 2, 3, d)?))
}

fn braided_residual(r: &SpectralOperator, u: Complex64, v: Complex64) -> Result<f64> {
    let d = r.local_dim();
    let (a1, a2) = three_site(&r.at(u)?, d)?;
    let (b1, b2) = three_site(&r.at(u + v)?, d)?;
    let (c1, c2) = three_site(&r.at(v)?, d)?;
    let lhs = &(&a1 * &b2) * &c1;
    let rhs = &(&c2 * &b1) * &a2;
    Ok(residual(&lhs, &rhs))
}

fn plain_residual(r: &SpectralOperator, u: Complex64, v: Complex64) -> Result<f64> {
    let d = r.local_dim();
    let swap12 = embed_pair(&permutation_operator(d), 1, 3, d)?;
    let r12 = |w| embed_pair(&r.at(w)?, 1, 3, d);
    let r23 = |w| embed_pair(&r.at(w)?, 2, 3, d);
    let r13 = |w| -> Result<CMatrix> { Ok(&(&swap12 * &r23(w)?) * &swap12) };
    let lhs = &(&r12(u)? * &r13(u + v)?) * &r23(v)?;
    let rhs = &(&r23(v)? * &r13(u + v)?) * &r12(u)?;
    Ok(residual(&lhs, &rhs))
}

/// `Ř₁(u)Ř₂(u+v)Ř₁(v) = Ř₂(v)Ř₁(u+v)Ř₂(u)` on a three-site chain, over all grid pairs.
pub fn check_ybe_braided(r: &SpectralOperator, grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    let mut rep = ReportBuilder::new("ybe-braided", tol);
    for (u, v) in grid.pairs() {
        let what = fmt_point(u, Some(v));
        if !grid.admit(r.poles(), &[u, v, u + v], &what, &mut rep)? {
            continue;
        }
        if let Some(res) = grid.settle(braided_residual(r, u, v), &what, &mut rep)? {
            rep.sample(Some(u), Some(v), res);
        }
    }
    Ok(rep.finish())
}

/// `R₁₂(u)R₁₃(u+v)R₂₃(v) = R₂₃(v)R₁₃(u+v)R₁₂(u)` with `R₁₃ = P₁₂R₂₃P₁₂`,
/// cross-checked against the braided equation for `Ř = P·R`.
pub fn check_ybe_r_form(r: &SpectralOperator, grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    if r.form() != OperatorForm::Plain {
        return Err(Error::FormMismatch { expected: "plain R" });
    }
    let braided = r.to_braided();
    let mut rep = ReportBuilder::new("ybe-r-form", tol);
    for (u, v) in grid.pairs() {
        let what = fmt_point(u, Some(v));
        if !grid.admit(r.poles(), &[u, v, u + v], &what, &mut rep)? {
            continue;
        }
        let direct = match grid.settle(plain_residual(r, u, v), &what, &mut rep)? {
            Some(x) => x,
            None => continue,
        };
        let via = braided_residual(&braided, u, v)?;
        rep.sample(Some(u), Some(v), direct);
        rep.sub("braided path (P*R)", via);
        if (direct <= tol) != (via <= tol) {
            rep.note(format!("operator and braided paths disagree at {what}: {direct:.3e} vs {via:.3e}"));
        }
    }
    Ok(rep.finish())
}

/// `[Ř₁(u), Ř₃(v)] = 0` on a four-site chain; a self-test of the embedding.
pub fn check_far_commutation(r: &SpectralOperator, grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    let d = r.local_dim();
    let mut rep = ReportBuilder::new("far-commutation", tol);
    for (u, v) in grid.pairs() {
        let what = fmt_point(u, Some(v));
        if !grid.admit(r.poles(), &[u, v], &what, &mut rep)? {
            continue;
        }
        let eval = (|| -> Result<f64> {
            let a = embed_pair(&r.at(u)?, 1, 4, d)?;
            let b = embed_pair(&r.at(v)?, 3, 4, d)?;
            Ok(residual(&(&a * &b), &(&b * &a)))
        })();
        if let Some(res) = grid.settle(eval, &what, &mut rep)? {
            rep.sample(Some(u), Some(v), res);
        }
    }
    Ok(rep.finish())
}

/// Standard initial condition: `Ř(0) = C·I` (braided) or `R(0) = c·P` (plain).
///
/// The constant is read off the trace, `C = tr Ř(0) / d²`.
pub fn initial_condition_operator(r: &SpectralOperator, tol: f64) -> Result<(Complex64, CheckReport)> {
    let zero = Complex64::new(0.0, 0.0);
    if r.poles().iter().any(|p| (p - zero).norm() <= POLE_TOL) {
        return Err(Error::PoleAtZero);
    }
    let d = r.local_dim();
    let n = (d * d) as f64;
    let m0 = r.at(zero).map_err(|e| match e {
        Error::PoleClash { .. } => Error::PoleAtZero,
        other => other,
    })?;
    let (c, target) = match r.form() {
        OperatorForm::Braided => {
            let c = m0.trace() / n;
            (c, CMatrix::identity(d * d).scale(c))
        }
        OperatorForm::Plain => {
            let p = permutation_operator(d);
            let c = (&p * &m0).trace() / n;
            (c, p.scale(c))
        }
    };
    let mut rep = ReportBuilder::new("initial-condition", tol);
    rep.sample(Some(zero), None, residual(&m0, &target));
    rep.param("C", c);
    if c.norm() <= tol {
        rep.note("C vanishes: the operator is degenerate at u = 0");
    }
    Ok((c, rep.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfn::parse;

    fn yang() -> SpectralOperator {
        let p = permutation_operator(2);
        SpectralOperator::from_fn(2, "I+uP", vec![], move |u| {
            Ok(&CMatrix::identity(4) + &p.scale(u))
        })
    }

    #[test]
    fn identity_solves_ybe() {
        let op = SpectralOperator::constant(CMatrix::identity(4), 2, "I").unwrap();
        let rep = check_ybe_braided(&op, &SampleGrid::default(), 1e-9).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.max_residual, 0.0);
        assert_eq!(rep.samples.len(), 25);
    }

    #[test]
    fn yang_operator_solves_ybe() {
        let rep = check_ybe_braided(&yang(), &SampleGrid::default(), 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn plain_yang_and_identity() {
        let p = permutation_operator(2);
        let r = SpectralOperator::from_fn(2, "P+uI", vec![], move |u| {
            Ok(&p + &CMatrix::identity(4).scale(u))
        })
        .with_form(OperatorForm::Plain);
        let rep = check_ybe_r_form(&r, &SampleGrid::default(), 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        let id = SpectralOperator::constant(CMatrix::identity(4), 2, "I")
            .unwrap()
            .with_form(OperatorForm::Plain);
        let rep = check_ybe_r_form(&id, &SampleGrid::default(), 1e-12).unwrap();
        assert_eq!(rep.max_residual, 0.0);
        assert!(matches!(
            check_ybe_r_form(&yang(), &SampleGrid::default(), 1e-9),
            Err(Error::FormMismatch { .. })
        ));
    }

    #[test]
    fn far_commutation_is_exact() {
        let rep = check_far_commutation(&yang(), &SampleGrid::default(), 1e-13).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.max_residual, 0.0);
    }

    #[test]
    fn initial_condition_of_yang() {
        let (c, rep) = initial_condition_operator(&yang(), 1e-12).unwrap();
        assert_eq!(c, Complex64::new(1.0, 0.0));
        assert!(rep.pass);
        let (c, rep) = initial_condition_operator(&yang().to_plain(), 1e-12).unwrap();
        assert_eq!(c, Complex64::new(1.0, 0.0));
        assert!(rep.pass);
    }

    #[test]
    fn declared_poles_are_refused() {
        let op = SpectralOperator::from_fn(1, "1/(1-u)", vec![Complex64::new(1.0, 0.0)], |u| {
            CMatrix::new(1, vec![Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - u)])
        });
        assert!(matches!(op.at_real(1.0), Err(Error::PoleClash { .. })));
        assert!(op.at_real(0.5).is_ok());
        let at_zero = SpectralOperator::from_fn(1, "1/u", vec![Complex64::new(0.0, 0.0)], |u| {
            CMatrix::new(1, vec![u.inv()])
        });
        assert!(matches!(initial_condition_operator(&at_zero, 1e-9), Err(Error::PoleAtZero)));
    }

    #[test]
    fn undeclared_pole_surfaces_as_clash() {
        let entries = vec![parse("1/(1-u)").unwrap()];
        let op = SpectralOperator::from_expressions(1, entries, Bindings::new(), vec![], "x").unwrap();
        assert!(matches!(op.at_real(1.0), Err(Error::PoleClash { .. })));
        let grid = SampleGrid::from_real(&[0.5, 1.0]);
        let rep = check_far_commutation(&op, &grid, 1e-9).unwrap();
        assert_eq!(rep.samples.len(), 1);
        assert!(rep.notes.iter().any(|n| n.contains("skipped")));
    }

    #[test]
    fn weight_round_trip() {
        let w = operator_to_weights(&yang());
        let rebuilt = {
            let w = w.clone();
            weights_to_operator(2, "rebuilt", vec![], move |i, k, j, l, u| w.weight(i, k, j, l, u))
        };
        for &u in &[-0.9, 0.0, 0.45] {
            assert_eq!(rebuilt.at_real(u).unwrap(), yang().at_real(u).unwrap());
        }
    }

    #[test]
    fn identity_weights_follow_convention() {
        // Ř(0) = C·I means S^{ik}_{jl}(0) = C δ_il δ_jk.
        let t = WeightTable::new(CMatrix::identity(4), 2).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                for j in 0..2 {
                    for l in 0..2 {
                        let expected = if i == l && j == k { 1.0 } else { 0.0 };
                        assert_eq!(t.get(i, k, j, l).re, expected);
                    }
                }
            }
        }
    }
}
