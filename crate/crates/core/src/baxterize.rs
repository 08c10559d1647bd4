//! Baxterization: spectral-parameter solutions built from a braid group
//! representation `B` and a scalar function `y(u)`.
//!
//! Every recipe is an affine combination `Σ_t c_t(y)·M_t` of fixed matrices
//! with coefficients rational in `y`. The output operator is evaluated from
//! the same expression text that is emitted, so what is checked is exactly
//! what is written out.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{check_braid_relations, check_temperley_lieb, ChainFamily};
use crate::error::{Error, Result};
use crate::exprfn::{evaluate, parse, Bindings, ExprError, ExprNode};
use crate::linalg::{
    distinct_eigenvalues, fit_scalar, residual, spectral_projectors, CMatrix, ProjectorFamily,
    DEFAULT_GROUPING_TOL,
};
use crate::report::{CheckReport, ReportBuilder, SampleGrid, DEFAULT_SAMPLES};
use crate::rmatrix::{check_ybe_braided, ScalarFn, SpectralOperator, POLE_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance on the defining values of a [`YFunction`].
pub const Y_TOL: f64 = 1e-9;

/// Points where a recipe's emitted expressions are compared with the
/// direct matrix formula.
pub const CONSTRUCTION_SAMPLES: [f64; 3] = [0.3, -0.7, 1.1];

/// Where the braid limit of a recipe sits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BraidLimit {
    Finite(Complex64),
    Infinity,
}

/// `Profile`: `y(u0) = 0`, `y(0) = 1`, used inside eigenvalue profiles.
/// `Additive`: `y(0) = 0`, `y` odd, used inside `f(u)` for the TL path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YConvention {
    Profile,
    Additive,
}

impl YConvention {
    fn name(self) -> &'static str {
        match self {
            YConvention::Profile => "profile",
            YConvention::Additive => "additive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YKind {
    /// `u/k`.
    Linear,
    /// `1 - u`.
    Affine,
    Custom,
}

/// The scalar function `y(u)` driving a recipe.
#[derive(Clone, Debug)]
pub struct YFunction {
    expr: ExprNode,
    constants: Bindings,
    kind: YKind,
    u0: BraidLimit,
    convention: YConvention,
}

impl YFunction {
    /// `y = u/k`, additive, braid limit at infinity.
    pub fn linear(k: Complex64) -> Result<Self> {
        Self::build(
            parse("u/k")?,
            Bindings::new().with("k", k),
            YKind::Linear,
            BraidLimit::Infinity,
            YConvention::Additive,
        )
    }

    /// `y = 1 - u`, profile, braid limit at `u0 = 1`.
    pub fn affine() -> Self {
        Self::build(
            parse("1-u").expect("literal parses"),
            Bindings::new(),
            YKind::Affine,
            BraidLimit::Finite(ONE),
            YConvention::Profile,
        )
        .expect("1 - u satisfies the profile convention")
    }

    pub fn custom(text: &str, constants: Bindings, u0: BraidLimit, convention: YConvention) -> Result<Self> {
        Self::build(parse(text)?, constants, YKind::Custom, u0, convention)
    }

    fn build(expr: ExprNode, constants: Bindings, kind: YKind, u0: BraidLimit, convention: YConvention) -> Result<Self> {
        if let Some(name) = expr
            .identifiers()
            .into_iter()
            .find(|n| n != "u" && constants.get(n).is_none())
        {
            return Err(ExprError::UnboundIdentifier {
                span: crate::exprfn::Span { start: 0, end: 0 },
                name,
            }
            .into());
        }
        let y = Self {
            expr,
            constants,
            kind,
            u0,
            convention,
        };
        y.validate()?;
        Ok(y)
    }

    fn violation(&self, detail: String) -> Error {
        Error::BadYFunction {
            convention: self.convention.name(),
            detail,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.convention {
            YConvention::Profile => {
                let at0 = self.at(ZERO)?;
                if (at0 - ONE).norm() > Y_TOL {
                    return Err(self.violation(format!("y(0) = {at0}, expected 1")));
                }
                if let BraidLimit::Finite(u0) = self.u0 {
                    let v = self.at(u0)?;
                    if v.norm() > Y_TOL {
                        return Err(self.violation(format!("y(u0) = {v} at u0 = {u0}, expected 0")));
                    }
                }
            }
            YConvention::Additive => {
                let at0 = self.at(ZERO)?;
                if at0.norm() > Y_TOL {
                    return Err(self.violation(format!("y(0) = {at0}, expected 0")));
                }
                for x in DEFAULT_SAMPLES {
                    let u = Complex64::new(x, 0.0);
                    let (Ok(a), Ok(b)) = (self.at(u), self.at(-u)) else {
                        continue;
                    };
                    if (a + b).norm() > Y_TOL * 1f64.max(a.norm()) {
                        return Err(self.violation(format!("y({u}) + y({}) = {}, expected 0", -u, a + b)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, u: Complex64) -> Result<Complex64> {
        let mut env = self.constants.clone();
        env.set("u", u)?;
        evaluate(&self.expr, &env).map_err(|e| match e {
            ExprError::DivisionNearZero { span } => Error::PoleClash {
                u,
                context: Some(format!("division near zero at {span} in y(u) = {}", self.expr)),
            },
            other => other.into(),
        })
    }

    pub fn text(&self) -> String {
        self.expr.to_string()
    }

    pub fn constants(&self) -> &Bindings {
        &self.constants
    }

    pub fn kind(&self) -> YKind {
        self.kind
    }

    pub fn u0(&self) -> BraidLimit {
        self.u0
    }

    pub fn convention(&self) -> YConvention {
        self.convention
    }

    fn require(&self, convention: YConvention) -> Result<()> {
        if self.convention != convention {
            return Err(Error::BadYFunction {
                convention: convention.name(),
                detail: format!("this step needs a {} y, got a {} one", convention.name(), self.convention.name()),
            });
        }
        Ok(())
    }

    /// `(a, b)` with `y(u) = a·u + b`, if `y` is affine in `u`.
    fn affine_coefficients(&self) -> Option<(Complex64, Complex64)> {
        let pts = [0.0, 1.0, 2.5].map(|x| self.at(Complex64::new(x, 0.0)).ok());
        let [Some(y0), Some(y1), Some(y2)] = pts else {
            return None;
        };
        let a = y1 - y0;
        let predicted = y0 + a * 2.5;
        ((predicted - y2).norm() <= 1e-12 * 1f64.max(y2.norm())).then_some((a, y0))
    }
}

/// Polynomial in `y`, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
struct Poly(Vec<Complex64>);

impl Poly {
    fn constant(c: Complex64) -> Self {
        Poly(vec![c])
    }

    /// `a·y + b`.
    fn linear(a: Complex64, b: Complex64) -> Self {
        Poly(vec![b, a])
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![ZERO; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    fn scale(&self, s: Complex64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    fn eval(&self, y: Complex64) -> Complex64 {
        self.0.iter().rev().fold(ZERO, |acc, &c| acc * y + c)
    }

    fn is_one(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &c)| c == if i == 0 { ONE } else { ZERO })
    }

    fn text(&self, y: &str) -> String {
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(i, &c)| match i {
                0 => literal(c),
                1 => format!("{}*({y})", literal(c)),
                _ => format!("{}*({y})^{i}", literal(c)),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// An exact, re-parseable literal for `z`.
fn literal(z: Complex64) -> String {
    let real = |x: f64| {
        if x.is_sign_negative() && x != 0.0 {
            format!("(-{:?})", -x)
        } else {
            format!("{:?}", x.abs())
        }
    };
    if z.im == 0.0 {
        real(z.re)
    } else if z.re == 0.0 {
        format!("({}*i)", real(z.im))
    } else {
        format!("({} + {}*i)", real(z.re), real(z.im))
    }
}

/// `num(y)/den(y)` times a fixed matrix.
#[derive(Clone, Debug)]
struct Term {
    num: Poly,
    den: Poly,
    matrix: CMatrix,
}

impl Term {
    fn poly(num: Poly, matrix: CMatrix) -> Self {
        Term {
            num,
            den: Poly::constant(ONE),
            matrix,
        }
    }

    fn coefficient(&self, y: Complex64) -> Result<Complex64> {
        let den = self.den.eval(y);
        if den.norm() < crate::exprfn::POLE_THRESHOLD {
            return Err(Error::PoleClash {
                u: y,
                context: Some("coefficient denominator vanishes at this y".into()),
            });
        }
        Ok(self.num.eval(y) / den)
    }
}

fn combine(terms: &[Term], y: Complex64) -> Result<CMatrix> {
    let dim = terms[0].matrix.dim();
    terms.iter().try_fold(CMatrix::zeros(dim), |acc, t| Ok(&acc + &t.matrix.scale(t.coefficient(y)?)))
}

fn entry_texts(terms: &[Term], y: &str) -> Vec<String> {
    let dim = terms[0].matrix.dim();
    (0..dim * dim)
        .map(|idx| {
            let parts: Vec<String> = terms
                .iter()
                .filter(|t| t.matrix.entries()[idx] != ZERO)
                .map(|t| {
                    let num = t.num.scale(t.matrix.entries()[idx]);
                    if t.den.is_one() {
                        format!("({})", num.text(y))
                    } else {
                        format!("({})/({})", num.text(y), t.den.text(y))
                    }
                })
                .collect();
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join(" + ")
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecipeMethod {
    ProjectorProfile,
    TwoBlockInverse,
    TwoBlockTl,
    ThreeBlockLmn,
}

impl fmt::Display for RecipeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecipeMethod::ProjectorProfile => "projector-profile",
            RecipeMethod::TwoBlockInverse => "two-block",
            RecipeMethod::TwoBlockTl => "two-block-tl",
            RecipeMethod::ThreeBlockLmn => "three-block",
        })
    }
}

/// A Baxterized operator together with how it was built.
#[derive(Clone, Debug)]
pub struct BaxterizationRecipe {
    pub source: CMatrix,
    pub ordering: Vec<Complex64>,
    pub y: YFunction,
    pub method: RecipeMethod,
    pub output: SpectralOperator,
    /// Row-major expression text of the output in `u` and `y`'s constants.
    pub entries: Vec<String>,
    /// Expression-versus-formula agreement, braid-limit round trip and
    /// method-specific consistency checks.
    pub construction: CheckReport,
}

fn local_dim_of(b: &CMatrix) -> Result<usize> {
    let n = b.dim();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::BadShape {
            expected: d * d,
            got: n,
        });
    }
    Ok(d)
}

fn spectrum_text(eigs: &[Complex64]) -> String {
    let items: Vec<String> = eigs.iter().map(|z| format!("{z}")).collect();
    format!("{{{}}}", items.join(", "))
}

fn family_with_blocks(b: &CMatrix, n: usize, ordering: Option<&[Complex64]>) -> Result<ProjectorFamily> {
    let eigs = distinct_eigenvalues(b, DEFAULT_GROUPING_TOL);
    if eigs.len() != n {
        return Err(Error::WrongBlockCount {
            expected: n,
            found: eigs.len(),
            spectrum: spectrum_text(&eigs),
        });
    }
    let pf = spectral_projectors(b, DEFAULT_GROUPING_TOL)?;
    match ordering {
        Some(o) => pf.reordered(o),
        None => Ok(pf),
    }
}

/// Builds the output operator from `terms` and runs the shared construction
/// checks. `direct` evaluates the recipe straight from its matrix formula.
fn finish_recipe(
    source: &CMatrix,
    ordering: Vec<Complex64>,
    y: &YFunction,
    method: RecipeMethod,
    terms: Vec<Term>,
    direct: impl Fn(Complex64) -> Result<CMatrix>,
    mut rep: ReportBuilder,
) -> Result<BaxterizationRecipe> {
    let d = local_dim_of(source)?;
    let y_text = y.text();
    let entries = entry_texts(&terms, &y_text);
    let parsed = entries.iter().map(|t| parse(t)).collect::<Result<Vec<_>, _>>()?;

    let mut poles = Vec::new();
    for t in &terms {
        if t.den.0.len() == 2 {
            let y_star = -t.den.0[0] / t.den.0[1];
            match y.affine_coefficients() {
                Some((a, b)) if a != ZERO => {
                    let u = (y_star - b) / a;
                    if !poles.iter().any(|p: &Complex64| (p - u).norm() <= POLE_TOL) {
                        poles.push(u);
                    }
                }
                _ => rep.note(format!(
                    "y is not affine in u; poles at y(u) = {y_star} are detected during evaluation only"
                )),
            }
        }
    }
    let label = format!("{method} recipe, y(u) = {y_text}");
    let output = SpectralOperator::from_expressions(d, parsed, y.constants.clone(), poles, label)?;

    for x in CONSTRUCTION_SAMPLES {
        let u = Complex64::new(x, 0.0);
        let what = format!("construction sample u={u}");
        let grid = SampleGrid::default();
        let value = (|| -> Result<f64> { Ok(residual(&output.at(u)?, &direct(u)?)) })();
        if let Some(r) = grid.settle(value, &what, &mut rep)? {
            rep.sample(Some(u), None, r);
        }
    }
    if let BraidLimit::Finite(u0) = y.u0 {
        match output.at(u0) {
            Ok(m) => rep.sub("braid limit reproduces the source", residual(&m, source)),
            Err(e) => rep.note(format!("braid limit not evaluated: {e}")),
        }
    }

    Ok(BaxterizationRecipe {
        source: source.clone(),
        ordering,
        y: y.clone(),
        method,
        output,
        entries,
        construction: rep.finish(),
    })
}

/// `Π_i (B - λ_i I)` over the distinct eigenvalues; the block number is the
/// count of distinct eigenvalues and is reported as parameter `n`.
///
/// The residual is relative to `Π_i max|B - λ_i I|`.
pub fn check_reduction_relation(b: &CMatrix, tol: f64) -> Result<CheckReport> {
    let eigs = distinct_eigenvalues(b, DEFAULT_GROUPING_TOL);
    let id = CMatrix::identity(b.dim());
    let (product, scale) = eigs.iter().fold((id.clone(), 1.0), |(acc, s), &l| {
        let factor = b - &id.scale(l);
        let m = factor.max_abs();
        (&acc * &factor, s * m)
    });
    let mut rep = ReportBuilder::new("reduction-relation", tol);
    rep.sample(None, None, product.max_abs() / 1f64.max(scale));
    rep.param("n", Complex64::new(eigs.len() as f64, 0.0));
    rep.note(format!("distinct eigenvalues {}", spectrum_text(&eigs)));
    Ok(rep.finish())
}

/// `Λ_i` as polynomials in `y`.
fn profile_polys(eigs: &[Complex64]) -> Result<Vec<Poly>> {
    if eigs.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::ZeroEigenvalue);
    }
    let n = eigs.len();
    let last = Poly::constant(eigs[n - 1]);
    Ok((0..n)
        .map(|i| {
            let head = (0..i).fold(Poly::constant(ONE), |acc, j| {
                acc.mul(&Poly::linear(eigs[j] / eigs[j + 1], ONE))
            });
            let tail = (i..n - 1).fold(Poly::constant(ONE), |acc, k| {
                acc.mul(&Poly::linear(ONE, eigs[k] / eigs[k + 1]))
            });
            head.mul(&tail).mul(&last)
        })
        .collect())
}

/// `Λ_i(u) = Π_{j<i}(λ_j/λ_{j+1}·y + 1) · Π_{k≥i}(y + λ_k/λ_{k+1}) · λ_n`,
/// the second product running to `n-1`.
pub fn lambda_profile(eigs_ordered: &[Complex64], y: &YFunction) -> Result<Vec<ScalarFn>> {
    y.require(YConvention::Profile)?;
    let polys = profile_polys(eigs_ordered)?;
    Ok(polys
        .into_iter()
        .map(|p| {
            let y = y.clone();
            Arc::new(move |u| Ok(p.eval(y.at(u)?))) as ScalarFn
        })
        .collect())
}

/// `Ř(u) = Σ Λ_i(u) P_i`.
pub fn assemble_from_projectors(
    pf: &ProjectorFamily,
    lambdas: Vec<ScalarFn>,
    poles: Vec<Complex64>,
) -> Result<SpectralOperator> {
    if lambdas.len() != pf.len() {
        return Err(Error::LengthMismatch {
            expected: pf.len(),
            got: lambdas.len(),
        });
    }
    let d = local_dim_of(&pf.projectors()[0])?;
    let projectors = pf.projectors().to_vec();
    let dim = projectors[0].dim();
    Ok(SpectralOperator::from_fn(d, "projector profile", poles, move |u| {
        lambdas
            .iter()
            .zip(&projectors)
            .try_fold(CMatrix::zeros(dim), |acc, (l, p)| Ok(&acc + &p.scale(l(u)?)))
    }))
}

/// `Ř(u) = Σ Λ_i(u) P_i` for any block number, with the profile built from
/// the ordering (default: descending real part).
pub fn baxterize_profile(b: &CMatrix, ordering: Option<&[Complex64]>, y: &YFunction) -> Result<BaxterizationRecipe> {
    y.require(YConvention::Profile)?;
    let pf = spectral_projectors(b, DEFAULT_GROUPING_TOL)?;
    let pf = match ordering {
        Some(o) => pf.reordered(o)?,
        None => pf,
    };
    let polys = profile_polys(pf.eigenvalues())?;
    let terms: Vec<Term> = polys
        .iter()
        .zip(pf.projectors())
        .map(|(p, m)| Term::poly(p.clone(), m.clone()))
        .collect();
    let direct_terms = terms.clone();
    let yy = y.clone();
    let rep = ReportBuilder::new("construction", 1e-9);
    finish_recipe(
        b,
        pf.eigenvalues().to_vec(),
        y,
        RecipeMethod::ProjectorProfile,
        terms,
        move |u| combine(&direct_terms, yy.at(u)?),
        rep,
    )
}

/// `Ř(u) = B + λ₁λ₂·y(u)·B⁻¹` for a two-block `B`.
///
/// The construction report also compares with `Λ₁P₁ + Λ₂P₂`.
pub fn baxterize_two_blocks(b: &CMatrix, ordering: Option<&[Complex64]>, y: &YFunction) -> Result<BaxterizationRecipe> {
    y.require(YConvention::Profile)?;
    let pf = family_with_blocks(b, 2, ordering)?;
    let binv = b.inverse()?;
    let (l1, l2) = (pf.eigenvalues()[0], pf.eigenvalues()[1]);
    let mut rep = ReportBuilder::new("construction", 1e-9);
    if (l1 + l2).norm() <= 1e-12 * 1f64.max(l1.norm()) {
        rep.note("λ1 + λ2 = 0: Ř(0) = (λ1 + λ2)·I vanishes, so the initial condition is degenerate");
    }
    let terms = vec![
        Term::poly(Poly::constant(ONE), b.clone()),
        Term::poly(Poly::linear(l1 * l2, ZERO), binv.clone()),
    ];
    let polys = profile_polys(pf.eigenvalues())?;
    let projectors = pf.projectors().to_vec();
    for x in CONSTRUCTION_SAMPLES {
        let u = Complex64::new(x, 0.0);
        let Ok(yu) = y.at(u) else { continue };
        let form = polys
            .iter()
            .zip(&projectors)
            .fold(CMatrix::zeros(b.dim()), |acc, (p, m)| &acc + &m.scale(p.eval(yu)));
        let inverse_form = b + &binv.scale(l1 * l2 * yu);
        rep.sub("equals the projector form", residual(&inverse_form, &form));
    }
    let (bb, yy) = (b.clone(), y.clone());
    finish_recipe(
        b,
        pf.eigenvalues().to_vec(),
        y,
        RecipeMethod::TwoBlockInverse,
        terms,
        move |u| Ok(&bb + &binv.scale(l1 * l2 * yy.at(u)?)),
        rep,
    )
}

/// `B/λ₁ = I + ξE` with `ξ = λ₂/λ₁ - 1` and `E` the projector onto `λ₂`.
#[derive(Clone, Debug)]
pub struct TLExtraction {
    pub e: CMatrix,
    pub xi: Complex64,
    /// Fitted from `E² = δE`.
    pub delta: Complex64,
    pub report: CheckReport,
}

pub fn tl_generator_from_bgr(b: &CMatrix, ordering: Option<&[Complex64]>, tol: f64) -> Result<TLExtraction> {
    let pf = family_with_blocks(b, 2, ordering)?;
    let (l1, l2) = (pf.eigenvalues()[0], pf.eigenvalues()[1]);
    if l1.norm() == 0.0 {
        return Err(Error::ZeroLeadingEigenvalue);
    }
    let e = pf.projectors()[1].clone();
    let (params, report) = check_temperley_lieb(&e, local_dim_of(b)?, tol)?;
    Ok(TLExtraction {
        e,
        xi: l2 / l1 - ONE,
        delta: params.delta,
        report,
    })
}

/// A generator rescaled so that `E₁E₂E₁ = E₁`.
#[derive(Clone, Debug)]
pub struct TLNormalization {
    pub e: CMatrix,
    pub delta: Complex64,
    /// `κ` in `E₁E₂E₁ = κE₁` before rescaling; `E` was divided by `√κ`.
    pub kappa: Complex64,
    pub report: CheckReport,
}

/// Rescales `e` by `1/√κ` (principal root) where `E₁E₂E₁ = κE₁`.
pub fn normalize_tl(e: &CMatrix, d: usize, tol: f64) -> Result<TLNormalization> {
    if e.is_zero(0.0) {
        return Err(Error::ZeroGenerator);
    }
    let fam = ChainFamily::new(e.clone(), d, 3)?;
    let (e1, e2) = (fam.site(1)?, fam.site(2)?);
    let e121 = &(e1 * e2) * e1;
    let kappa = fit_scalar(e1, &e121).unwrap_or(ZERO);
    let fit = residual(&e121, &e1.scale(kappa));
    if kappa.norm() == 0.0 || fit > tol {
        return Err(Error::InconsistentParams {
            name: "kappa",
            residual: if kappa.norm() == 0.0 { f64::INFINITY } else { fit },
        });
    }
    let e = e.scale(ONE / kappa.sqrt());
    let (params, report) = check_temperley_lieb(&e, d, tol)?;
    Ok(TLNormalization {
        e,
        delta: params.delta,
        kappa,
        report,
    })
}

/// `f(u) = (2/δ)·y(u)/(1 - y(u))`.
pub fn f_from_y(delta: Complex64, y: &YFunction) -> Result<ScalarFn> {
    if delta.norm() == 0.0 {
        return Err(Error::ZeroDelta);
    }
    y.require(YConvention::Additive)?;
    let y = y.clone();
    Ok(Arc::new(move |u| {
        let yu = y.at(u)?;
        let den = ONE - yu;
        if den.norm() < crate::exprfn::POLE_THRESHOLD {
            return Err(Error::PoleClash {
                u,
                context: Some("y(u) = 1 is a pole of f".into()),
            });
        }
        Ok(yu / den * (2.0 / delta))
    }))
}

pub const F_UNITARITY: &str = "f(u) + f(-u) + delta f(u) f(-u) = 0";

/// `y(u) + y(v) = y(u+v)·[1 - (1 - 4/δ²)·y(u)y(v)]` on the grid pairs, and
/// the unitarity constraint on `f = f_from_y(δ, y)`.
pub fn check_y_functional(y: &YFunction, delta: Complex64, grid: &SampleGrid, tol: f64) -> Result<CheckReport> {
    let f = f_from_y(delta, y)?;
    let c = ONE - 4.0 / (delta * delta);
    let mut rep = ReportBuilder::new("y-functional", tol);
    rep.param("delta", delta);
    for (u, v) in grid.pairs() {
        let what = crate::report::fmt_point(u, Some(v));
        let value = (|| -> Result<f64> {
            let (yu, yv, yw) = (y.at(u)?, y.at(v)?, y.at(u + v)?);
            Ok(crate::linalg::scalar_residual(yu + yv, yw * (ONE - c * yu * yv)))
        })();
        if let Some(r) = grid.settle(value, &what, &mut rep)? {
            rep.sample(Some(u), Some(v), r);
        }
    }
    for &u in &grid.u_values {
        let what = crate::report::fmt_point(u, None);
        let value = (|| -> Result<f64> {
            let (a, b) = (f(u)?, f(-u)?);
            Ok((a + b + delta * a * b).norm() / 1f64.max(a.norm()).max(b.norm()))
        })();
        if let Some(r) = grid.settle(value, &what, &mut rep)? {
            rep.sub(F_UNITARITY, r);
        }
    }
    Ok(rep.finish())
}

/// `Ř(u) = I + f(u)·E` with `f = f_from_y(δ, y)`.
///
/// With `generator` set, `b` is taken to be a TL generator already.
/// Otherwise `E` is the projector of the last eigenvalue in the ordering,
/// rescaled by [`normalize_tl`].
pub fn baxterize_two_blocks_tl(
    b: &CMatrix,
    ordering: Option<&[Complex64]>,
    y: &YFunction,
    generator: bool,
    tol: f64,
) -> Result<BaxterizationRecipe> {
    y.require(YConvention::Additive)?;
    let d = local_dim_of(b)?;
    let mut rep = ReportBuilder::new("construction", 1e-9);
    let (e, delta, tl, ordering) = if generator {
        let (params, report) = check_temperley_lieb(b, d, tol)?;
        (b.clone(), params.delta, report, Vec::new())
    } else {
        let pf = spectral_projectors(b, DEFAULT_GROUPING_TOL)?;
        let pf = match ordering {
            Some(o) => pf.reordered(o)?,
            None => pf,
        };
        let raw = pf.projectors().last().expect("nonempty spectrum");
        let norm = normalize_tl(raw, d, tol)?;
        rep.param("kappa", norm.kappa);
        (norm.e, norm.delta, norm.report, pf.eigenvalues().to_vec())
    };
    rep.param("delta", delta);
    rep.sub("generator satisfies TL", tl.max_residual);
    if delta.norm() == 0.0 {
        return Err(Error::ZeroDelta);
    }
    let scale = 2.0 / delta;
    let id = CMatrix::identity(b.dim());
    let terms = vec![
        Term::poly(Poly::constant(ONE), id.clone()),
        Term {
            num: Poly::linear(scale, ZERO),
            den: Poly::linear(-ONE, ONE),
            matrix: e.clone(),
        },
    ];
    let f = f_from_y(delta, y)?;
    finish_recipe(
        b,
        ordering,
        y,
        RecipeMethod::TwoBlockTl,
        terms,
        move |u| Ok(&id + &e.scale(f(u)?)),
        rep,
    )
}

/// `Ř(u) = L(u)B + M(u)I + N(u)B⁻¹` with `L = 1 - y`,
/// `M = (λ₁+λ₂)(λ₂+λ₃)/λ₂·y` and `N = λ₁λ₃·y(y - 1)`.
pub fn baxterize_three_blocks(b: &CMatrix, ordering: Option<&[Complex64]>, y: &YFunction) -> Result<BaxterizationRecipe> {
    y.require(YConvention::Profile)?;
    let pf = family_with_blocks(b, 3, ordering)?;
    let l = pf.eigenvalues();
    let (l1, l2, l3) = (l[0], l[1], l[2]);
    if l2.norm() == 0.0 {
        return Err(Error::ZeroMiddleEigenvalue);
    }
    let binv = b.inverse()?;
    let id = CMatrix::identity(b.dim());
    let mc = (l1 + l2) * (l2 + l3) / l2;
    let nc = l1 * l3;
    let terms = vec![
        Term::poly(Poly::linear(-ONE, ONE), b.clone()),
        Term::poly(Poly::linear(mc, ZERO), id.clone()),
        Term::poly(Poly(vec![ZERO, -nc, nc]), binv.clone()),
    ];
    let (bb, yy) = (b.clone(), y.clone());
    finish_recipe(
        b,
        l.to_vec(),
        y,
        RecipeMethod::ThreeBlockLmn,
        terms,
        move |u| {
            let yu = yy.at(u)?;
            Ok(&(&bb.scale(ONE - yu) + &id.scale(mc * yu)) + &binv.scale(nc * yu * (yu - ONE)))
        },
        ReportBuilder::new("construction", 1e-9),
    )
}

/// A three-block recipe for one eigenvalue ordering with its YBE verdict.
#[derive(Clone, Debug)]
pub struct OrderingVerdict {
    pub recipe: BaxterizationRecipe,
    pub ybe: CheckReport,
}

/// All orderings of the three eigenvalues, each with its YBE report.
pub fn enumerate_orderings(b: &CMatrix, y: &YFunction, grid: &SampleGrid, tol: f64) -> Result<Vec<OrderingVerdict>> {
    let eigs = distinct_eigenvalues(b, DEFAULT_GROUPING_TOL);
    if eigs.len() != 3 {
        return Err(Error::WrongBlockCount {
            expected: 3,
            found: eigs.len(),
            spectrum: spectrum_text(&eigs),
        });
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| {
            let ordering: Vec<Complex64> = p.iter().map(|&i| eigs[i]).collect();
            let recipe = baxterize_three_blocks(b, Some(&ordering), y)?;
            let ybe = check_ybe_braided(&recipe.output, grid, tol)?;
            Ok(OrderingVerdict { recipe, ybe })
        })
        .collect()
}

/// `B = kG` with `E = (G + G⁻¹)/m - I`.
#[derive(Clone, Debug)]
pub struct BMWNormalization {
    pub g: CMatrix,
    /// `None` when `m = 0`.
    pub e: Option<CMatrix>,
    pub k: Complex64,
    pub l: Complex64,
    pub m: Complex64,
    /// Residual of `G² = (m + l⁻¹)G - (ml⁻¹ + 1)I + l⁻¹G⁻¹`.
    pub report: CheckReport,
}

impl BMWNormalization {
    pub fn e(&self) -> Result<&CMatrix> {
        self.e.as_ref().ok_or(Error::ZeroM)
    }
}

/// `k = √(λ₁λ₂)` (principal), `G = B/k`, `l = k/λ₃`, `m = (λ₁+λ₂)/k`.
pub fn bmw_normalize(b: &CMatrix, ordering: Option<&[Complex64]>, tol: f64) -> Result<BMWNormalization> {
    let pf = family_with_blocks(b, 3, ordering)?;
    let l = pf.eigenvalues();
    let (l1, l2, l3) = (l[0], l[1], l[2]);
    let mut rep = ReportBuilder::new("bmw-normalization", tol);
    let prod = l1 * l2;
    if prod.im == 0.0 && prod.re < 0.0 {
        rep.note("λ1·λ2 is negative real; k is its principal square root");
    }
    let k = prod.sqrt();
    if k.norm() == 0.0 || l3.norm() == 0.0 {
        return Err(Error::Singular { rcond: 0.0 });
    }
    let g = b.scale(ONE / k);
    let gi = g.inverse()?;
    let lp = k / l3;
    let m = (l1 + l2) / k;
    let id = CMatrix::identity(b.dim());
    let linv = ONE / lp;
    let rhs = &(&g.scale(m + linv) - &id.scale(m * linv + ONE)) + &gi.scale(linv);
    rep.sample(None, None, residual(&(&g * &g), &rhs));
    rep.param("k", k);
    rep.param("l", lp);
    rep.param("m", m);
    let e = if m.norm() <= 1e-12 {
        rep.note("m = 0: E = (G + G^-1)/m - I is undefined");
        None
    } else {
        Some(&(&g + &gi).scale(ONE / m) - &id)
    };
    Ok(BMWNormalization {
        g,
        e,
        k,
        l: lp,
        m,
        report: rep.finish(),
    })
}

/// Probes used for the `u0 = ∞` braid limit.
pub const INFINITY_PROBES: [f64; 2] = [1e10, 1e14];

/// `B = s(u0)·Ř(u0)` with the braid relations checked on `B`.
///
/// At infinity the caller's scale is required and `s(u)·Ř(u)` is read at
/// [`INFINITY_PROBES`]; their spread is reported as an informational entry.
pub fn bgr_from_spectral(
    r: &SpectralOperator,
    u0: BraidLimit,
    scale: Option<ScalarFn>,
    tol: f64,
) -> Result<(CMatrix, CheckReport)> {
    let d = r.local_dim();
    let r = r.to_braided();
    let (b, spread) = match u0 {
        BraidLimit::Finite(u0) => {
            if r.poles().iter().any(|p| (p - u0).norm() <= POLE_TOL) {
                return Err(Error::PoleAtLimit(u0));
            }
            let m = r.at(u0).map_err(|e| match e {
                Error::PoleClash { .. } => Error::PoleAtLimit(u0),
                other => other,
            })?;
            let s = match &scale {
                Some(s) => s(u0)?,
                None => ONE,
            };
            (m.scale(s), None)
        }
        BraidLimit::Infinity => {
            let s = scale.ok_or(Error::InfinityWithoutScale)?;
            let probe = |x: f64| -> Result<CMatrix> {
                let u = Complex64::new(x, 0.0);
                Ok(r.at(u)?.scale(s(u)?))
            };
            let a = probe(INFINITY_PROBES[0])?;
            let b = probe(INFINITY_PROBES[1])?;
            let spread = residual(&a, &b);
            (b, Some(spread))
        }
    };
    let mut report = check_braid_relations(&b, d, tol)?;
    if let Some(spread) = spread {
        report.breakdown.push(crate::report::SubCheck {
            name: "limit probe spread".into(),
            max_residual: spread,
            pass: spread <= tol,
            informational: true,
        });
    }
    Ok((b, report))
}
