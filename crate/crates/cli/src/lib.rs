//! Command-line front end for the fracwiener experiments.
//!
//! Every command writes CSV tables and a JSON summary into `--out`, plus a
//! `manifest.json` recording the parameters and a digest of each file.
//! `replay` re-runs a manifest and compares digests.
//!
//! Exit codes: 0 success, 1 an asserted check failed, 2 usage or I/O error,
//! 3 numerical failure.

pub mod commands;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{dirac::DiracArgs, fp::FpArgs, kernel::KernelArgs, ncg::NcgArgs, replay::ReplayArgs, square::SquareArgs};
pub use error::{CliError, CliResult};
pub use output::{RunManifest, MANIFEST_FILE};

#[derive(Debug, Parser)]
#[command(name = "fracwiener", version, about = "Fractional powers of Brownian motion: experiments and checks")]
pub struct Cli {
    /// Worker threads for ensemble commands; outputs do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Square the α = ½ power path and compare with the source Brownian path.
    SquareCheck(SquareArgs),
    /// Brownian versus Wick-rotated square-root terminal distributions.
    KernelExperiment(KernelArgs),
    /// Complex Fokker–Planck runs: scalar free/potential or spinor fields.
    FpSolve(FpArgs),
    /// Clifford coordinate, Z spectrum and sphere volume checks.
    NcgCheck(NcgArgs),
    /// Itô squares of the Dirac increments.
    DiracCheck(DiracArgs),
    /// Re-run a manifest and compare output digests.
    Replay(ReplayArgs),
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub lines: Vec<String>,
    pub manifest: Option<RunManifest>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub(crate) fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    run_command(cli.command, cli.workers)
}

pub fn run_command(command: Command, workers: Option<usize>) -> CliResult<Outcome> {
    if workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    match command {
        Command::SquareCheck(a) => commands::square::run(&a),
        Command::KernelExperiment(a) => commands::kernel::run(&a, workers),
        Command::FpSolve(a) => commands::fp::run(&a),
        Command::NcgCheck(a) => commands::ncg::run(&a),
        Command::DiracCheck(a) => commands::dirac::run(&a, workers),
        Command::Replay(a) => commands::replay::run(&a, workers),
    }
}

/// Rebuilds a command from a manifest, writing into `out`.
pub fn command_from_manifest(manifest: &RunManifest, out: PathBuf) -> CliResult<Command> {
    fn parse<T: serde::de::DeserializeOwned>(m: &RunManifest) -> CliResult<T> {
        serde_json::from_value(m.params.clone()).map_err(|e| CliError::Usage(format!("manifest parameters for `{}`: {e}", m.command)))
    }
    Ok(match manifest.command.as_str() {
        commands::square::NAME => Command::SquareCheck(SquareArgs { out, ..parse(manifest)? }),
        commands::kernel::NAME => Command::KernelExperiment(KernelArgs { out, ..parse(manifest)? }),
        commands::fp::NAME => Command::FpSolve(FpArgs { out, ..parse(manifest)? }),
        commands::ncg::NAME => Command::NcgCheck(NcgArgs { out, ..parse(manifest)? }),
        commands::dirac::NAME => Command::DiracCheck(DiracArgs { out, ..parse(manifest)? }),
        other => return Err(CliError::Usage(format!("manifest names unknown command `{other}`"))),
    })
}

#[cfg(test)]
pub(crate) mod testutil {
    use std::path::Path;

    pub fn read_json(path: &Path) -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    /// Validates `instance` against `schemas/<name>.schema.json`.
    pub fn assert_schema(name: &str, instance: &Path) {
        let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
        let validator = jsonschema::validator_for(&read_json(&schema_path)).unwrap();
        let value = read_json(instance);
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{} violates {name}: {errors:?}", instance.display());
    }

    /// Validates the summary and the manifest in an output directory.
    pub fn assert_outputs(name: &str, dir: &Path) {
        assert_schema(name, &dir.join("summary.json"));
        assert_schema("manifest", &dir.join(crate::MANIFEST_FILE));
    }
}
