//! Command-line grammar.
//!
//! Besides the listed flags, any `--name value` pair binds a constant used by
//! the input files or expressions, e.g. `--k 2` or `--q 3`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use baxter_core::exprfn::{evaluate, parse, Bindings};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "baxter", version, about = "Yang-Baxter checks and Baxterization of braid group representations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one checker. Exit 0 on pass, 1 on fail, 2 on input error.
    Check(CheckArgs),
    /// Build a spectral-parameter solution from a braid group representation.
    Baxterize(BaxterizeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Ybe,
    YbeR,
    Unitarity,
    Crossing,
    SecondInversion,
    Cpt,
    Charge,
    Braid,
    Tl,
    Bmw,
    Skein,
    Transfer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    TwoBlock,
    TwoBlockTl,
    ThreeBlock,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Comma-separated spectral parameters; pole clashes are errors.
    #[arg(long)]
    pub grid: Option<String>,
    /// Residual tolerance [default: $BAXTER_TOL, else 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub kind: CheckKind,
    /// Operator or matrix file; `bmw` and `skein` take G and E, or one BGR.
    #[arg(required = true, num_args = 1..=2)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub common: Common,
    /// Chain length for `transfer`.
    #[arg(long, default_value_t = 3)]
    pub chain: usize,
    /// Crossing data file for `crossing`, `second-inversion` and `cpt`.
    #[arg(long)]
    pub crossing: Option<PathBuf>,
    /// Comma-separated per-state charges for `charge`.
    #[arg(long)]
    pub charge: Option<String>,
    /// Eigenvalue ordering for a one-file `bmw` or `skein`.
    #[arg(long)]
    pub ordering: Option<String>,
}

#[derive(Debug, Args)]
pub struct BaxterizeArgs {
    #[arg(value_enum)]
    pub method: Method,
    /// Braid group representation (matrix or u-free spectral file).
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated eigenvalue ordering; expressions in the constants.
    #[arg(long)]
    pub ordering: Option<String>,
    /// y(u); `1-u` for the block methods if omitted.
    #[arg(long)]
    pub y: Option<String>,
    /// Braid limit of a custom y: a value or `inf`.
    #[arg(long)]
    pub u0: Option<String>,
    /// Write the operator as a spectral file here.
    #[arg(long)]
    pub emit: Option<PathBuf>,
    /// Take the input as a TL generator (`two-block-tl` only).
    #[arg(long)]
    pub generator: bool,
}

const FLAGS: &[&str] = &[
    "grid", "tol", "out", "json", "chain", "crossing", "charge", "ordering", "y", "u0", "emit", "generator", "help",
    "version",
];

/// A constant value: any expression free of identifiers other than `i`.
pub fn constant_value(text: &str) -> Result<Complex64, CliError> {
    let e = parse(text).map_err(|e| CliError::usage(format!("bad value `{text}`: {e}")))?;
    evaluate(&e, &Bindings::new()).map_err(|e| CliError::usage(format!("bad value `{text}`: {e}")))
}

/// Splits `--name value` constant bindings from the arguments clap handles.
pub fn split_constants(args: Vec<OsString>) -> Result<(Vec<OsString>, BTreeMap<String, Complex64>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut constants = BTreeMap::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(text) = arg.to_str().and_then(|s| s.strip_prefix("--")) else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match text.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (text.to_string(), None),
        };
        let is_name = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_alphanumeric() || c == '_');
        if name.is_empty() || FLAGS.contains(&name.as_str()) || !is_name {
            rest.push(arg);
            continue;
        }
        if name == "u" || name == "i" {
            return Err(CliError::usage(format!("`{name}` cannot be bound as a constant")));
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .and_then(|v| v.into_string().ok())
                .ok_or_else(|| CliError::usage(format!("--{name} needs a value")))?,
        };
        if constants.insert(name.clone(), constant_value(&value)?).is_some() {
            return Err(CliError::usage(format!("--{name} given twice")));
        }
    }
    Ok((rest, constants))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn constants_are_split_from_flags() {
        let (rest, c) = split_constants(os(&["baxter", "check", "ybe", "f.json", "--k", "2", "--tol", "1e-9", "--t=-1"])).unwrap();
        assert_eq!(rest, os(&["baxter", "check", "ybe", "f.json", "--tol", "1e-9"]));
        assert_eq!(c["k"], Complex64::new(2.0, 0.0));
        assert_eq!(c["t"], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn complex_and_bad_values() {
        let (_, c) = split_constants(os(&["--q", "1+2*i"])).unwrap();
        assert_eq!(c["q"], Complex64::new(1.0, 2.0));
        assert!(split_constants(os(&["--q", "1+"])).is_err());
        assert!(split_constants(os(&["--q"])).is_err());
        assert!(split_constants(os(&["--u", "1"])).is_err());
        assert!(split_constants(os(&["--k", "1", "--k", "2"])).is_err());
    }
}
