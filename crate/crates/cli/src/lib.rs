//! Command-line frontend for `baxter-core`: JSON inputs, checker dispatch
//! and deterministic JSON reports.

pub mod args;
pub mod commands;
pub mod error;
pub mod files;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::{split_constants, Cli, Command};
use crate::commands::Outcome;
use crate::error::CliError;
use crate::files::Overrides;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

fn execute(args: Vec<OsString>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (rest, constants) = split_constants(args)?;
    let cli = match Cli::try_parse_from(rest) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            write!(stdout, "{e}").ok();
            return Ok(EXIT_PASS);
        }
        Err(e) => return Err(CliError::usage(e.to_string().trim_end())),
    };
    let mut overrides = Overrides::new(constants);
    let (outcome, common) = match &cli.command {
        Command::Check(a) => (commands::check(a, &mut overrides)?, &a.common),
        Command::Baxterize(a) => (commands::baxterize(a, &mut overrides)?, &a.common),
    };
    let Outcome { report, emit } = outcome;
    if let Some((path, spectral)) = emit {
        let mut text = serde_json::to_string_pretty(&spectral).expect("spectral file serializes");
        text.push('\n');
        write_file(&path, &text)?;
    }
    let json = report.to_json();
    if let Some(path) = &common.out {
        write_file(path, &json)?;
    }
    let shown = if common.json { json } else { report.to_text() };
    stdout.write_all(shown.as_bytes()).ok();
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Runs the tool and returns the process exit code.
pub fn run(args: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(args, stdout) {
        Ok(code) => code,
        Err(e) => {
            writeln!(stderr, "error: {e}").ok();
            EXIT_INPUT
        }
    }
}
