//! `check` and `baxterize`.

use std::path::Path;

use baxter_core::algebra::{bmw_prime_report, check_braid_relations, check_temperley_lieb, fit_skein_4cb};
use baxter_core::baxterize::{
    baxterize_three_blocks, baxterize_two_blocks, baxterize_two_blocks_tl, bmw_normalize, BaxterizationRecipe,
    BraidLimit, YConvention, YFunction,
};
use baxter_core::exprfn::{evaluate, parse, Bindings};
use baxter_core::properties::{
    check_charge_conservation, check_cpt, check_crossing, check_second_inversion, check_unitarity, natural_charge,
    reflection_bar,
};
use baxter_core::report::{ReportBuilder, DEFAULT_POLE_MARGIN};
use baxter_core::rmatrix::{check_ybe_braided, check_ybe_r_form};
use baxter_core::transfer::check_transfer_commutation;
use baxter_core::{CMatrix, CheckReport, ClashPolicy, SampleGrid, VertexWeights, DEFAULT_TOL};
use num_complex::Complex64;

use clap::ValueEnum;

use crate::args::{BaxterizeArgs, CheckArgs, CheckKind, Common, Method};
use crate::error::CliError;
use crate::files::{
    crossing_from_json, load_matrix, load_operator, local_dim_of, read_input, Input, Overrides, SpectralFileOut,
};
use crate::output::{digest, ReportFile};

/// Environment variable that overrides the default tolerance.
pub const TOL_ENV: &str = "BAXTER_TOL";

/// A finished run: the report and whether it passed.
#[derive(Debug)]
pub struct Outcome {
    pub report: ReportFile,
    /// The emitted operator, when asked for.
    pub emit: Option<(std::path::PathBuf, SpectralFileOut)>,
}

fn tolerance(flag: Option<f64>) -> Result<f64, CliError> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{TOL_ENV}={s} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::usage(format!("tolerance {tol} must be finite and non-negative")));
    }
    Ok(tol)
}

fn list_values(text: &str, env: &Bindings, overrides: &mut Overrides, what: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(',')
        .map(|item| {
            let e = parse(item.trim()).map_err(|e| CliError::usage(format!("{what} entry `{item}`: {e}")))?;
            let env = overrides.bind_for(&e.identifiers(), env.clone());
            evaluate(&e, &env).map_err(|e| CliError::usage(format!("{what} entry `{item}`: {e}")))
        })
        .collect()
}

/// User grids reject pole clashes so the offending sample is named.
fn grid(common: &Common, env: &Bindings, overrides: &mut Overrides) -> Result<SampleGrid, CliError> {
    let Some(text) = &common.grid else {
        return Ok(SampleGrid::default());
    };
    let values = list_values(text, env, overrides, "--grid")?;
    Ok(SampleGrid {
        u_values: values.clone(),
        v_values: values,
        pole_margin: DEFAULT_POLE_MARGIN,
        policy: ClashPolicy::Reject,
    })
}

fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Canonical text of everything that shapes a run, hashed with the inputs.
fn command_text(head: &str, common: &Common, overrides: &Overrides, extra: &[(&str, String)]) -> String {
    let mut s = head.to_string();
    let tol = common.tol.map(|t| format!("{t:e}")).unwrap_or_else(|| "default".into());
    s.push_str(&format!(" tol={tol}"));
    if let Some(g) = &common.grid {
        s.push_str(&format!(" grid={g}"));
    }
    for (k, v) in extra {
        s.push_str(&format!(" {k}={v}"));
    }
    for (k, v) in overrides.values() {
        s.push_str(&format!(" {k}={}", fmt_c(*v)));
    }
    s
}

fn check_unused(overrides: &Overrides) -> Result<(), CliError> {
    match overrides.unused().as_slice() {
        [] => Ok(()),
        names => Err(CliError::usage(format!(
            "constant(s) not used by any input: {}",
            names.iter().map(|n| format!("--{n}")).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn local_dim(m: &CMatrix, input: &Input) -> Result<usize, CliError> {
    local_dim_of(m.dim()).ok_or_else(|| CliError::Schema {
        path: input.path.clone(),
        pointer: "/dim".into(),
        message: format!("dim {} is not the square of a local dimension", m.dim()),
    })
}

fn with_scalars(mut report: CheckReport, scalars: &[(Complex64, Complex64)]) -> CheckReport {
    for &(u, s) in scalars {
        report.parameters.push((format!("s({})", fmt_c(u)), s));
    }
    report
}

pub fn check(args: &CheckArgs, overrides: &mut Overrides) -> Result<Outcome, CliError> {
    let tol = tolerance(args.common.tol)?;
    let inputs = args.inputs.iter().map(|p| read_input(p)).collect::<Result<Vec<_>, _>>()?;
    let two = inputs.len() == 2;
    if two && !matches!(args.kind, CheckKind::Bmw | CheckKind::Skein) {
        return Err(CliError::usage("only `bmw` and `skein` take two input files"));
    }
    let mut extra_bytes: Vec<Vec<u8>> = Vec::new();
    let mut related = Vec::new();

    let main = match args.kind {
        CheckKind::Braid | CheckKind::Tl => {
            let (m, _) = load_matrix(&inputs[0], overrides)?;
            let d = local_dim(&m, &inputs[0])?;
            if args.kind == CheckKind::Braid {
                check_braid_relations(&m, d, tol)?
            } else {
                check_temperley_lieb(&m, d, tol)?.1
            }
        }
        CheckKind::Bmw | CheckKind::Skein => {
            let (g, e, d) = if two {
                let (g, _) = load_matrix(&inputs[0], overrides)?;
                let (e, _) = load_matrix(&inputs[1], overrides)?;
                let d = local_dim(&g, &inputs[0])?;
                (g, e, d)
            } else {
                let (b, env) = load_matrix(&inputs[0], overrides)?;
                let d = local_dim(&b, &inputs[0])?;
                let ordering = match &args.ordering {
                    Some(o) => Some(list_values(o, &env, overrides, "--ordering")?),
                    None => None,
                };
                let n = bmw_normalize(&b, ordering.as_deref(), tol)?;
                let e = n.e()?.clone();
                related.push(n.report.clone());
                (n.g, e, d)
            };
            if args.kind == CheckKind::Bmw {
                bmw_prime_report(&g, &e, d, tol)?.1
            } else {
                let s = fit_skein_4cb(&g, &e)?;
                let mut rep = ReportBuilder::new("skein-4cb", tol);
                rep.sample(None, None, s.residual);
                rep.param("alpha", s.alpha);
                rep.param("beta", s.beta);
                rep.param("gamma", s.gamma);
                rep.param("delta", s.delta4);
                if !s.unique {
                    rep.note("{I, E, G, G^-1} are linearly dependent; coefficients are not unique");
                }
                rep.finish()
            }
        }
        kind => {
            let (op, env) = load_operator(&inputs[0], overrides)?;
            let grid = grid(&args.common, &env, overrides)?;
            let d = op.local_dim();
            let crossing = match &args.crossing {
                Some(p) => {
                    let input = read_input(p)?;
                    let cd = crossing_from_json(&input, &env, overrides)?;
                    extra_bytes.push(input.bytes);
                    Some(cd)
                }
                None => None,
            };
            let need_crossing = || {
                crossing
                    .clone()
                    .ok_or_else(|| CliError::usage("this check needs --crossing <file>"))
            };
            match kind {
                CheckKind::Ybe => check_ybe_braided(&op.to_braided(), &grid, tol)?,
                CheckKind::YbeR => check_ybe_r_form(&op.to_plain(), &grid, tol)?,
                CheckKind::Unitarity => {
                    let u = check_unitarity(&op.to_braided(), &grid, tol)?;
                    with_scalars(u.report, &u.scalars)
                }
                CheckKind::Crossing => check_crossing(&op.to_braided(), &need_crossing()?, &grid, tol)?,
                CheckKind::SecondInversion => {
                    let s = check_second_inversion(&op.to_braided(), &need_crossing()?, &grid, tol)?;
                    with_scalars(s.report, &s.scalars)
                }
                CheckKind::Cpt => {
                    let bar = match &crossing {
                        Some(cd) => cd.bar().to_vec(),
                        None => reflection_bar(d),
                    };
                    check_cpt(&op.to_braided(), &bar, &grid, tol)?
                }
                CheckKind::Charge => {
                    let charge = match &args.charge {
                        Some(text) => text
                            .split(',')
                            .map(|c| {
                                c.trim()
                                    .parse::<i64>()
                                    .map_err(|_| CliError::usage(format!("--charge entry `{c}` is not an integer")))
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                        None => natural_charge(d),
                    };
                    if charge.len() != d {
                        return Err(CliError::usage(format!("--charge needs {d} values, got {}", charge.len())));
                    }
                    check_charge_conservation(&op.to_braided(), &charge, &grid, tol)?
                }
                CheckKind::Transfer => {
                    check_transfer_commutation(&VertexWeights::new(op.to_braided()), args.chain, &grid, tol)?
                }
                _ => unreachable!("matrix checks are handled above"),
            }
        }
    };
    check_unused(overrides)?;

    let kind = args.kind.to_possible_value().expect("no skipped variants").get_name().to_string();
    let mut extra = vec![];
    if args.kind == CheckKind::Transfer {
        extra.push(("chain", args.chain.to_string()));
    }
    if let Some(c) = &args.charge {
        extra.push(("charge", c.clone()));
    }
    if let Some(o) = &args.ordering {
        extra.push(("ordering", o.clone()));
    }
    let text = command_text(&format!("check {kind}"), &args.common, overrides, &extra);
    let mut bytes: Vec<&[u8]> = inputs.iter().map(|i| i.bytes.as_slice()).collect();
    bytes.extend(extra_bytes.iter().map(Vec::as_slice));
    let mut report = ReportFile::new(format!("check {kind}"), digest(&text, &bytes), &main);
    report.related = related.iter().map(Into::into).collect();
    Ok(Outcome { report, emit: None })
}

fn y_function(args: &BaxterizeArgs, env: &Bindings, overrides: &mut Overrides) -> Result<YFunction, CliError> {
    let convention = match args.method {
        Method::TwoBlockTl => YConvention::Additive,
        Method::TwoBlock | Method::ThreeBlock => YConvention::Profile,
    };
    let text = match (&args.y, convention) {
        (Some(t), _) => t.clone(),
        (None, YConvention::Profile) => "1-u".to_string(),
        (None, YConvention::Additive) => return Err(CliError::usage("two-block-tl needs --y, e.g. --y u/k --k 2")),
    };
    let expr = parse(&text).map_err(|e| CliError::usage(format!("--y `{text}`: {e}")))?;
    let names: Vec<String> = expr.identifiers().into_iter().filter(|n| n != "u").collect();
    let bound = overrides.bind_for(&names, Bindings::new());
    // File constants are visible to y as well, unless overridden.
    let mut constants = Bindings::new();
    for n in &names {
        if let Some(v) = bound.get(n).or_else(|| env.get(n)) {
            constants = constants.with(n, v);
        }
    }
    if args.u0.is_none() {
        if expr == parse("u/k").expect("literal") && convention == YConvention::Additive {
            if let Some(k) = constants.get("k") {
                return Ok(YFunction::linear(k)?);
            }
        }
        if expr == parse("1-u").expect("literal") && convention == YConvention::Profile {
            return Ok(YFunction::affine());
        }
    }
    let u0 = match args.u0.as_deref() {
        Some("inf" | "infinity") => BraidLimit::Infinity,
        Some(v) => {
            let e = parse(v).map_err(|e| CliError::usage(format!("--u0 `{v}`: {e}")))?;
            let env = overrides.bind_for(&e.identifiers(), constants.clone());
            BraidLimit::Finite(evaluate(&e, &env).map_err(|e| CliError::usage(format!("--u0 `{v}`: {e}")))?)
        }
        None if convention == YConvention::Additive => BraidLimit::Infinity,
        None => return Err(CliError::usage("a custom profile y needs --u0")),
    };
    Ok(YFunction::custom(&text, constants, u0, convention)?)
}

fn emitted(recipe: &BaxterizationRecipe, d: usize, source: &str) -> SpectralFileOut {
    let constants = recipe
        .y
        .constants()
        .names()
        .map(|n| {
            let v = recipe.y.constants().get(n).expect("listed name");
            (n.to_string(), [v.re, v.im])
        })
        .collect();
    let ordering: Vec<String> = recipe.ordering.iter().map(|&z| fmt_c(z)).collect();
    let mut description = format!("{} recipe from {source} with y(u) = {}", recipe.method, recipe.y.text());
    if !ordering.is_empty() {
        description.push_str(&format!(", ordering {}", ordering.join(",")));
    }
    SpectralFileOut {
        description,
        local_dim: d,
        constants,
        poles: recipe.output.poles().iter().map(|&p| literal(p)).collect(),
        entries: recipe.entries.clone(),
    }
}

/// Round-trip exact expression for a complex constant.
fn literal(z: Complex64) -> String {
    let real = |x: f64| if x < 0.0 { format!("({x:?})") } else { format!("{x:?}") };
    match (z.re, z.im) {
        (re, im) if im == 0.0 => real(re),
        (re, im) if re == 0.0 => format!("{}*i", real(im)),
        (re, im) => format!("({} + {}*i)", real(re), real(im)),
    }
}

pub fn baxterize(args: &BaxterizeArgs, overrides: &mut Overrides) -> Result<Outcome, CliError> {
    let tol = tolerance(args.common.tol)?;
    let input = read_input(&args.input)?;
    let (b, env) = load_matrix(&input, overrides)?;
    let d = local_dim(&b, &input)?;
    if args.generator && args.method != Method::TwoBlockTl {
        return Err(CliError::usage("--generator applies to two-block-tl only"));
    }
    let ordering = match &args.ordering {
        Some(o) => Some(list_values(o, &env, overrides, "--ordering")?),
        None => None,
    };
    let y = y_function(args, &env, overrides)?;
    let grid = grid(&args.common, &env, overrides)?;
    check_unused(overrides)?;

    let recipe = match args.method {
        Method::TwoBlock => baxterize_two_blocks(&b, ordering.as_deref(), &y)?,
        Method::TwoBlockTl => baxterize_two_blocks_tl(&b, ordering.as_deref(), &y, args.generator, tol)?,
        Method::ThreeBlock => baxterize_three_blocks(&b, ordering.as_deref(), &y)?,
    };
    let mut ybe = check_ybe_braided(&recipe.output, &grid, tol)?;
    for (n, &l) in recipe.ordering.iter().enumerate() {
        ybe.parameters.push((format!("lambda{}", n + 1), l));
    }
    if !recipe.construction.pass {
        ybe.pass = false;
        ybe.notes.push("the construction report failed; see related".into());
    }

    let method = args.method.to_possible_value().expect("no skipped variants").get_name().to_string();
    let source = Path::new(&input.path)
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| input.path.clone());
    let spectral = emitted(&recipe, d, &source);
    let mut extra = vec![("y", y.text())];
    if let Some(o) = &args.ordering {
        extra.push(("ordering", o.clone()));
    }
    if let Some(u0) = &args.u0 {
        extra.push(("u0", u0.clone()));
    }
    if args.generator {
        extra.push(("generator", "true".into()));
    }
    let text = command_text(&format!("baxterize {method}"), &args.common, overrides, &extra);
    let mut report = ReportFile::new(format!("baxterize {method}"), digest(&text, &[&input.bytes]), &ybe);
    report.related = vec![(&recipe.construction).into()];
    let emit = match &args.emit {
        Some(path) => Some((path.clone(), spectral)),
        None => {
            report.operator = Some(spectral);
            None
        }
    };
    Ok(Outcome { report, emit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        let env = Bindings::new();
        for z in [
            Complex64::new(2.0, 0.0),
            Complex64::new(-0.1, 0.0),
            Complex64::new(0.0, -3.5),
            Complex64::new(1.0 / 3.0, 2.0f64.sqrt()),
        ] {
            let back = evaluate(&parse(&literal(z)).unwrap(), &env).unwrap();
            assert_eq!(back, z, "{}", literal(z));
        }
    }
}
