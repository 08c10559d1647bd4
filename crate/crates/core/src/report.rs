//! Check reports and sample grids shared by every checker.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used when a caller does not pick one.
pub const DEFAULT_TOL: f64 = 1e-9;

/// One evaluated sample: spectral parameters (absent for constant checks)
/// and the residual observed there.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub u: Option<Complex64>,
    pub v: Option<Complex64>,
    pub residual: f64,
}

/// A named relation inside a larger check.
///
/// Informational entries are measured and reported but never decide the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct SubCheck {
    pub name: String,
    pub max_residual: f64,
    pub pass: bool,
    pub informational: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check_name: String,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: bool,
    pub samples: Vec<Sample>,
    pub notes: Vec<String>,
    pub breakdown: Vec<SubCheck>,
    /// Fitted or extracted scalars (delta, l, m, C, ...).
    pub parameters: Vec<(String, Complex64)>,
}

impl CheckReport {
    pub fn sub(&self, name: &str) -> Option<&SubCheck> {
        self.breakdown.iter().find(|s| s.name == name)
    }

    pub fn parameter(&self, name: &str) -> Option<Complex64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

fn sanitize(r: f64) -> f64 {
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// Accumulates samples and sub-checks, then fixes the verdict.
#[derive(Debug)]
pub struct ReportBuilder {
    name: String,
    tol: f64,
    samples: Vec<Sample>,
    notes: Vec<String>,
    subs: Vec<SubCheck>,
    params: Vec<(String, Complex64)>,
}

impl ReportBuilder {
    pub fn new(name: impl Into<String>, tol: f64) -> Self {
        Self {
            name: name.into(),
            tol,
            samples: Vec::new(),
            notes: Vec::new(),
            subs: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn sample(&mut self, u: Option<Complex64>, v: Option<Complex64>, residual: f64) {
        self.samples.push(Sample {
            u,
            v,
            residual: sanitize(residual),
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }

    /// Adds `residual` to the named sub-check, keeping the running maximum.
    pub fn sub(&mut self, name: &str, residual: f64) {
        self.push_sub(name, residual, false);
    }

    pub fn informational(&mut self, name: &str, residual: f64) {
        self.push_sub(name, residual, true);
    }

    fn push_sub(&mut self, name: &str, residual: f64, informational: bool) {
        let residual = sanitize(residual);
        match self.subs.iter_mut().find(|s| s.name == name) {
            Some(s) => s.max_residual = s.max_residual.max(residual),
            None => self.subs.push(SubCheck {
                name: name.to_string(),
                max_residual: residual,
                pass: false,
                informational,
            }),
        }
    }

    pub fn param(&mut self, name: &str, value: Complex64) {
        self.params.push((name.to_string(), value));
    }

    pub fn finish(self) -> CheckReport {
        let mut max_residual = self.samples.iter().map(|s| s.residual).fold(0.0, f64::max);
        let mut breakdown = self.subs;
        for s in &mut breakdown {
            s.pass = s.max_residual <= self.tol;
            if !s.informational {
                max_residual = max_residual.max(s.max_residual);
            }
        }
        let mut notes = self.notes;
        if self.samples.is_empty() {
            notes.push("no admissible samples were evaluated".to_string());
        }
        CheckReport {
            check_name: self.name,
            tolerance: self.tol,
            max_residual,
            pass: !self.samples.is_empty() && max_residual <= self.tol,
            samples: self.samples,
            notes,
            breakdown,
            parameters: self.params,
        }
    }
}

/// What a checker does with a sample that lands on a pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClashPolicy {
    /// Drop the sample and record a note.
    Skip,
    /// Fail the whole check with [`Error::PoleClash`].
    Reject,
}

/// Spectral-parameter samples for residual checks.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    pub u_values: Vec<Complex64>,
    pub v_values: Vec<Complex64>,
    pub pole_margin: f64,
    pub policy: ClashPolicy,
}

pub const DEFAULT_SAMPLES: [f64; 5] = [-0.9, -0.45, 0.0, 0.45, 0.9];
pub const DEFAULT_POLE_MARGIN: f64 = 1e-6;

impl Default for SampleGrid {
    fn default() -> Self {
        Self::from_real(&DEFAULT_SAMPLES)
    }
}

impl SampleGrid {
    /// Same real samples for `u` and `v`, skip policy.
    pub fn from_real(values: &[f64]) -> Self {
        let vals: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self {
            u_values: vals.clone(),
            v_values: vals,
            pole_margin: DEFAULT_POLE_MARGIN,
            policy: ClashPolicy::Skip,
        }
    }

    pub fn with_policy(mut self, policy: ClashPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.u_values
            .iter()
            .flat_map(move |&u| self.v_values.iter().map(move |&v| (u, v)))
    }

    /// Checks that every point in `points` clears `poles`. On a clash, the
    /// skip policy records `what` in the report and returns `Ok(false)`.
    pub fn admit(
        &self,
        poles: &[Complex64],
        points: &[Complex64],
        what: &str,
        report: &mut ReportBuilder,
    ) -> Result<bool> {
        for &p in points {
            if let Some(pole) = poles.iter().find(|&&pole| (pole - p).norm() <= self.pole_margin) {
                match self.policy {
                    ClashPolicy::Reject => {
                        return Err(Error::PoleClash {
                            u: p,
                            context: Some(format!("{what} is within {:.1e} of pole {pole}", self.pole_margin)),
                        })
                    }
                    ClashPolicy::Skip => {
                        report.note(format!("skipped {what}: {p} is within {:.1e} of pole {pole}", self.pole_margin));
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Applies the clash policy to an evaluation result: pole clashes
    /// discovered during evaluation are skipped (with a note) or raised.
    pub fn settle<T>(&self, value: Result<T>, what: &str, report: &mut ReportBuilder) -> Result<Option<T>> {
        match value {
            Ok(v) => Ok(Some(v)),
            Err(Error::PoleClash { u, context }) if self.policy == ClashPolicy::Skip => {
                report.note(format!(
                    "skipped {what}: evaluation at {u} hit a pole{}",
                    context.map(|c| format!(" ({c})")).unwrap_or_default()
                ));
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}

/// Formats a sample point for notes.
pub(crate) fn fmt_point(u: Complex64, v: Option<Complex64>) -> String {
    match v {
        Some(v) => format!("(u={u}, v={v})"),
        None => format!("u={u}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_residuals() {
        let mut b = ReportBuilder::new("t", 1e-9);
        b.sample(None, None, 1e-12);
        b.informational("printed variant", 1.0);
        let r = b.finish();
        assert!(r.pass);
        assert_eq!(r.max_residual, 1e-12);
        assert!(!r.sub("printed variant").unwrap().pass);

        let mut b = ReportBuilder::new("t", 1e-9);
        b.sample(None, None, 1e-12);
        b.sub("relation", 1e-3);
        let r = b.finish();
        assert!(!r.pass);
        assert_eq!(r.max_residual, 1e-3);
    }

    #[test]
    fn empty_reports_never_pass() {
        let r = ReportBuilder::new("t", 1.0).finish();
        assert!(!r.pass);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn nan_residual_fails() {
        let mut b = ReportBuilder::new("t", 1.0);
        b.sample(None, None, f64::NAN);
        assert!(!b.finish().pass);
    }

    #[test]
    fn clash_policies() {
        let poles = [Complex64::new(0.45, 0.0)];
        let grid = SampleGrid::default();
        let mut b = ReportBuilder::new("t", 1.0);
        assert!(!grid.admit(&poles, &[Complex64::new(0.45, 0.0)], "u", &mut b).unwrap());
        assert!(grid.admit(&poles, &[Complex64::new(0.9, 0.0)], "u", &mut b).unwrap());
        let strict = grid.with_policy(ClashPolicy::Reject);
        assert!(matches!(
            strict.admit(&poles, &[Complex64::new(0.45, 0.0)], "u", &mut b),
            Err(Error::PoleClash { .. })
        ));
    }
}
