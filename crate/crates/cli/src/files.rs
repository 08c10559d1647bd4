//! JSON input files and their validation.
//!
//! Complex numbers are `[re, im]` pairs. Expression strings appear only in
//! spectral files and crossing files. Validation errors carry a JSON pointer
//! to the offending value.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use baxter_core::exprfn::{evaluate, parse, Bindings, ExprNode, IMAGINARY_UNIT};
use baxter_core::properties::CrossingData;
use baxter_core::{CMatrix, OperatorForm, SpectralOperator};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Constants given on the command line, with a record of which were read.
#[derive(Debug, Default)]
pub struct Overrides {
    values: BTreeMap<String, Complex64>,
    used: BTreeSet<String>,
}

impl Overrides {
    pub fn new(values: BTreeMap<String, Complex64>) -> Self {
        Self {
            values,
            used: BTreeSet::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        self.values.get(name).copied()
    }

    pub fn mark(&mut self, name: &str) {
        if self.values.contains_key(name) {
            self.used.insert(name.to_string());
        }
    }

    /// `defaults` overridden by any command-line value of the same name.
    pub fn bind(&mut self, defaults: &BTreeMap<String, Complex64>) -> Bindings {
        let mut b = Bindings::new();
        for (name, &v) in defaults {
            let v = match self.get(name) {
                Some(o) => {
                    self.mark(name);
                    o
                }
                None => v,
            };
            b = b.with(name, v);
        }
        b
    }

    /// Binds every command-line constant an expression mentions.
    pub fn bind_for(&mut self, names: &[String], mut base: Bindings) -> Bindings {
        for n in names {
            if let Some(v) = self.get(n) {
                self.mark(n);
                base = base.with(n, v);
            }
        }
        base
    }

    pub fn values(&self) -> &BTreeMap<String, Complex64> {
        &self.values
    }

    pub fn unused(&self) -> Vec<&str> {
        self.values
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect()
    }
}

/// Raw bytes of an input file, kept for the report digest.
#[derive(Clone, Debug)]
pub struct Input {
    pub path: String,
    pub bytes: Vec<u8>,
    pub json: Value,
}

pub fn read_input(path: &Path) -> Result<Input, CliError> {
    let name = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: name.clone(),
        source,
    })?;
    let json = serde_json::from_slice(&bytes).map_err(|source| CliError::Json {
        path: name.clone(),
        source,
    })?;
    Ok(Input { path: name, bytes, json })
}

struct Ctx<'a> {
    path: &'a str,
}

impl Ctx<'_> {
    fn err(&self, pointer: impl Into<String>, message: impl Into<String>) -> CliError {
        CliError::Schema {
            path: self.path.to_string(),
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    fn object<'v>(&self, v: &'v Value, allowed: &[&str], required: &[&str]) -> Result<&'v Map<String, Value>, CliError> {
        let obj = v.as_object().ok_or_else(|| self.err("", "expected an object"))?;
        if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(self.err(format!("/{k}"), "unknown field"));
        }
        if let Some(k) = required.iter().find(|k| !obj.contains_key(**k)) {
            return Err(self.err(format!("/{k}"), "missing required field"));
        }
        Ok(obj)
    }

    fn count(&self, v: &Value, ptr: &str) -> Result<usize, CliError> {
        match v.as_u64() {
            Some(n) if n >= 1 => Ok(n as usize),
            _ => Err(self.err(ptr, "expected a positive integer")),
        }
    }

    fn complex(&self, v: &Value, ptr: &str) -> Result<Complex64, CliError> {
        let pair = v.as_array().filter(|a| a.len() == 2);
        let parts = pair.and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)));
        match parts {
            Some((re, im)) if re.is_finite() && im.is_finite() => Ok(Complex64::new(re, im)),
            Some(_) => Err(self.err(ptr, "non-finite number")),
            None => Err(self.err(ptr, "expected a [re, im] pair of numbers")),
        }
    }

    fn array<'v>(&self, v: &'v Value, ptr: &str) -> Result<&'v Vec<Value>, CliError> {
        v.as_array().ok_or_else(|| self.err(ptr, "expected an array"))
    }

    fn string<'v>(&self, v: &'v Value, ptr: &str) -> Result<&'v str, CliError> {
        v.as_str().ok_or_else(|| self.err(ptr, "expected a string"))
    }

    fn expr(&self, v: &Value, ptr: &str) -> Result<ExprNode, CliError> {
        let text = self.string(v, ptr)?;
        parse(text).map_err(|e| self.err(ptr, format!("{e} in `{text}`")))
    }

    /// Every identifier must be `u` (when allowed), `i` or a known name.
    fn scoped(&self, e: &ExprNode, known: &BTreeSet<String>, allow_u: bool, ptr: &str) -> Result<(), CliError> {
        for name in e.identifiers() {
            let ok = name == IMAGINARY_UNIT || (allow_u && name == "u") || known.contains(&name);
            if !ok {
                return Err(self.err(ptr, format!("unknown identifier `{name}`")));
            }
        }
        Ok(())
    }

    fn eval(&self, e: &ExprNode, env: &Bindings, ptr: &str) -> Result<Complex64, CliError> {
        evaluate(e, env).map_err(|err| self.err(ptr, err.to_string()))
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Row-major numeric matrix.
pub fn matrix_from_json(input: &Input) -> Result<CMatrix, CliError> {
    let cx = Ctx { path: &input.path };
    let obj = cx.object(&input.json, &["description", "dim", "entries"], &["dim", "entries"])?;
    if let Some(d) = obj.get("description") {
        cx.string(d, "/description")?;
    }
    let dim = cx.count(&obj["dim"], "/dim")?;
    let entries = cx.array(&obj["entries"], "/entries")?;
    if entries.len() != dim * dim {
        return Err(cx.err(
            "/entries",
            format!("expected {} entries for dim {dim}, found {}", dim * dim, entries.len()),
        ));
    }
    let values = entries
        .iter()
        .enumerate()
        .map(|(n, v)| cx.complex(v, &format!("/entries/{n}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CMatrix::new(dim, values)?)
}

/// A validated spectral file before constants are bound.
#[derive(Clone, Debug)]
pub struct SpectralSpec {
    pub path: String,
    pub local_dim: usize,
    pub form: OperatorForm,
    pub constants: BTreeMap<String, Complex64>,
    pub poles: Vec<ExprNode>,
    pub entries: Vec<ExprNode>,
}

pub fn spectral_from_json(input: &Input) -> Result<SpectralSpec, CliError> {
    let cx = Ctx { path: &input.path };
    let obj = cx.object(
        &input.json,
        &["description", "local_dim", "form", "constants", "poles", "entries"],
        &["local_dim", "entries"],
    )?;
    if let Some(d) = obj.get("description") {
        cx.string(d, "/description")?;
    }
    let local_dim = cx.count(&obj["local_dim"], "/local_dim")?;
    let form = match obj.get("form") {
        None => OperatorForm::Braided,
        Some(v) => match cx.string(v, "/form")? {
            "braided" => OperatorForm::Braided,
            "plain" => OperatorForm::Plain,
            other => return Err(cx.err("/form", format!("expected \"braided\" or \"plain\", found \"{other}\""))),
        },
    };
    let mut constants = BTreeMap::new();
    if let Some(v) = obj.get("constants") {
        let map = v.as_object().ok_or_else(|| cx.err("/constants", "expected an object"))?;
        for (name, value) in map {
            let ptr = format!("/constants/{name}");
            if !is_identifier(name) || name == "u" || name == IMAGINARY_UNIT {
                return Err(cx.err(ptr, "constant names must be identifiers other than `u` and `i`"));
            }
            constants.insert(name.clone(), cx.complex(value, &ptr)?);
        }
    }
    let known: BTreeSet<String> = constants.keys().cloned().collect();
    let mut poles = Vec::new();
    if let Some(v) = obj.get("poles") {
        for (n, p) in cx.array(v, "/poles")?.iter().enumerate() {
            let ptr = format!("/poles/{n}");
            let e = cx.expr(p, &ptr)?;
            cx.scoped(&e, &known, false, &ptr)?;
            poles.push(e);
        }
    }
    let raw = cx.array(&obj["entries"], "/entries")?;
    let n = local_dim.pow(4);
    if raw.len() != n {
        return Err(cx.err(
            "/entries",
            format!("expected {n} entries for local_dim {local_dim}, found {}", raw.len()),
        ));
    }
    let mut entries = Vec::with_capacity(n);
    for (k, v) in raw.iter().enumerate() {
        let ptr = format!("/entries/{k}");
        let e = cx.expr(v, &ptr)?;
        cx.scoped(&e, &known, true, &ptr)?;
        entries.push(e);
    }
    Ok(SpectralSpec {
        path: input.path.clone(),
        local_dim,
        form,
        constants,
        poles,
        entries,
    })
}

impl SpectralSpec {
    pub fn operator(&self, overrides: &mut Overrides) -> Result<(SpectralOperator, Bindings), CliError> {
        let env = overrides.bind(&self.constants);
        let cx = Ctx { path: &self.path };
        let poles = self
            .poles
            .iter()
            .enumerate()
            .map(|(n, p)| cx.eval(p, &env, &format!("/poles/{n}")))
            .collect::<Result<Vec<_>, _>>()?;
        let label = Path::new(&self.path)
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.clone());
        let op = SpectralOperator::from_expressions(self.local_dim, self.entries.clone(), env.clone(), poles, label)?
            .with_form(self.form);
        Ok((op, env))
    }

    /// The operator as a constant matrix; no entry may mention `u`.
    pub fn matrix(&self, overrides: &mut Overrides) -> Result<(CMatrix, Bindings), CliError> {
        let cx = Ctx { path: &self.path };
        if let Some(k) = self.entries.iter().position(|e| e.depends_on("u")) {
            return Err(cx.err(format!("/entries/{k}"), "a matrix input must not depend on u"));
        }
        let env = overrides.bind(&self.constants);
        let values = self
            .entries
            .iter()
            .enumerate()
            .map(|(k, e)| cx.eval(e, &env, &format!("/entries/{k}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((CMatrix::new(self.local_dim * self.local_dim, values)?, env))
    }
}

fn is_spectral(input: &Input) -> bool {
    input.json.get("local_dim").is_some()
}

/// A matrix from either a numeric file or a `u`-free spectral file.
pub fn load_matrix(input: &Input, overrides: &mut Overrides) -> Result<(CMatrix, Bindings), CliError> {
    if is_spectral(input) {
        spectral_from_json(input)?.matrix(overrides)
    } else {
        Ok((matrix_from_json(input)?, Bindings::new()))
    }
}

/// A spectral operator; a numeric matrix file gives a constant operator.
pub fn load_operator(input: &Input, overrides: &mut Overrides) -> Result<(SpectralOperator, Bindings), CliError> {
    if is_spectral(input) {
        return spectral_from_json(input)?.operator(overrides);
    }
    let m = matrix_from_json(input)?;
    let d = local_dim_of(m.dim()).ok_or_else(|| CliError::Schema {
        path: input.path.clone(),
        pointer: "/dim".into(),
        message: format!("dim {} is not the square of a local dimension", m.dim()),
    })?;
    Ok((SpectralOperator::constant(m, d, input.path.clone())?, Bindings::new()))
}

pub fn local_dim_of(n: usize) -> Option<usize> {
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n).then_some(d)
}

/// Crossing point, multipliers, bar map and optional factor `F(u)`.
pub fn crossing_from_json(input: &Input, env: &Bindings, overrides: &mut Overrides) -> Result<CrossingData, CliError> {
    let cx = Ctx { path: &input.path };
    let obj = cx.object(
        &input.json,
        &["description", "lambda", "multipliers", "bar", "factor"],
        &["lambda", "multipliers", "bar"],
    )?;
    if let Some(d) = obj.get("description") {
        cx.string(d, "/description")?;
    }
    let lambda_e = cx.expr(&obj["lambda"], "/lambda")?;
    let env = overrides.bind_for(&lambda_e.identifiers(), env.clone());
    let lambda = cx.eval(&lambda_e, &env, "/lambda")?;
    let multipliers = cx
        .array(&obj["multipliers"], "/multipliers")?
        .iter()
        .enumerate()
        .map(|(n, v)| cx.complex(v, &format!("/multipliers/{n}")))
        .collect::<Result<Vec<_>, _>>()?;
    let bar = cx
        .array(&obj["bar"], "/bar")?
        .iter()
        .enumerate()
        .map(|(n, v)| {
            v.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| cx.err(format!("/bar/{n}"), "expected a state index"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cd = CrossingData::new(lambda, multipliers, bar).map_err(|e| cx.err("", e.to_string()))?;
    let Some(f) = obj.get("factor") else {
        return Ok(cd);
    };
    let fe = cx.expr(f, "/factor")?;
    let env = overrides.bind_for(&fe.identifiers(), env);
    let known: BTreeSet<String> = env.names().map(str::to_string).collect();
    cx.scoped(&fe, &known, true, "/factor")?;
    Ok(cd.with_factor(Arc::new(move |u| {
        let mut e = env.clone();
        e.set("u", u)?;
        Ok(evaluate(&fe, &e)?)
    })))
}

/// A spectral file as written by `baxterize --emit`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralFileOut {
    pub description: String,
    pub local_dim: usize,
    pub constants: BTreeMap<String, [f64; 2]>,
    pub poles: Vec<String>,
    pub entries: Vec<String>,
}
