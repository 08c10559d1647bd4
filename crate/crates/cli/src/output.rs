//! Report files: fixed number formatting and an input digest.

use baxter_core::CheckReport;
use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::files::SpectralFileOut;

pub const TOOL_NAME: &str = "baxter";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A float printed with 17 significant digits; non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            "null".to_string()
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn pair(z: Complex64) -> [Num; 2] {
    [Num(z.re), Num(z.im)]
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleOut {
    pub u: Option<[Num; 2]>,
    pub v: Option<[Num; 2]>,
    pub residual: Num,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubCheckOut {
    pub name: String,
    pub max_residual: Num,
    pub pass: bool,
    pub informational: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParameterOut {
    pub name: String,
    pub value: [Num; 2],
}

/// One check, as serialized.
#[derive(Clone, Debug, Serialize)]
pub struct ReportBody {
    pub check: String,
    pub tolerance: Num,
    pub max_residual: Num,
    pub pass: bool,
    pub samples: Vec<SampleOut>,
    pub notes: Vec<String>,
    pub breakdown: Vec<SubCheckOut>,
    pub parameters: Vec<ParameterOut>,
}

impl From<&CheckReport> for ReportBody {
    fn from(r: &CheckReport) -> Self {
        Self {
            check: r.check_name.clone(),
            tolerance: Num(r.tolerance),
            max_residual: Num(r.max_residual),
            pass: r.pass,
            samples: r
                .samples
                .iter()
                .map(|s| SampleOut {
                    u: s.u.map(pair),
                    v: s.v.map(pair),
                    residual: Num(s.residual),
                })
                .collect(),
            notes: r.notes.clone(),
            breakdown: r
                .breakdown
                .iter()
                .map(|s| SubCheckOut {
                    name: s.name.clone(),
                    max_residual: Num(s.max_residual),
                    pass: s.pass,
                    informational: s.informational,
                })
                .collect(),
            parameters: r
                .parameters
                .iter()
                .map(|(n, v)| ParameterOut {
                    name: n.clone(),
                    value: pair(*v),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportFile {
    pub tool: Tool,
    pub command: String,
    pub input_digest: String,
    pub check: String,
    pub tolerance: Num,
    pub max_residual: Num,
    pub pass: bool,
    pub samples: Vec<SampleOut>,
    pub notes: Vec<String>,
    pub breakdown: Vec<SubCheckOut>,
    pub parameters: Vec<ParameterOut>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<ReportBody>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<SpectralFileOut>,
}

impl ReportFile {
    pub fn new(command: String, digest: String, main: &CheckReport) -> Self {
        let b = ReportBody::from(main);
        Self {
            tool: Tool {
                name: TOOL_NAME,
                version: TOOL_VERSION,
            },
            command,
            input_digest: digest,
            check: b.check,
            tolerance: b.tolerance,
            max_residual: b.max_residual,
            pass: b.pass,
            samples: b.samples,
            notes: b.notes,
            breakdown: b.breakdown,
            parameters: b.parameters,
            related: Vec::new(),
            operator: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        body_text(&mut out, &self.check, self.pass, self.max_residual, self.tolerance, &self.breakdown, &self.parameters, &self.notes);
        for r in &self.related {
            body_text(&mut out, &r.check, r.pass, r.max_residual, r.tolerance, &r.breakdown, &r.parameters, &r.notes);
        }
        out
    }
}

fn short(x: Num) -> String {
    if x.0.is_finite() {
        format!("{:.3e}", x.0)
    } else {
        "inf".into()
    }
}

fn complex_text(v: &[Num; 2]) -> String {
    let (re, im) = (v[0].0, v[1].0);
    if im == 0.0 {
        format!("{re}")
    } else {
        format!("{re}{:+}i", im)
    }
}

#[allow(clippy::too_many_arguments)]
fn body_text(
    out: &mut String,
    check: &str,
    pass: bool,
    max: Num,
    tol: Num,
    breakdown: &[SubCheckOut],
    params: &[ParameterOut],
    notes: &[String],
) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    out.push_str(&format!("{check}: {verdict} (max residual {}, tol {})\n", short(max), short(tol)));
    for p in params {
        out.push_str(&format!("  {} = {}\n", p.name, complex_text(&p.value)));
    }
    for s in breakdown {
        let tag = match (s.informational, s.pass) {
            (true, _) => "info",
            (false, true) => "ok",
            (false, false) => "FAIL",
        };
        out.push_str(&format!("  [{tag}] {}: {}\n", s.name, short(s.max_residual)));
    }
    for n in notes {
        out.push_str(&format!("  note: {n}\n"));
    }
}

/// SHA-256 over the canonical command text and each input's bytes.
pub fn digest(command: &str, inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
