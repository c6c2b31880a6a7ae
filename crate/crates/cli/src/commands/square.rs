use std::path::PathBuf;

use clap::Args;
use fracwiener::sde::{fractional_power_path, generate_wiener, square_path_check, FracConfig};
use serde::{Deserialize, Serialize};

use crate::output::OutputDir;
use crate::{pass_fail, CliResult, Outcome};

pub const NAME: &str = "square-check";
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SquareArgs {
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = FracConfig::default().seed)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    command: &'static str,
    steps: usize,
    dt: f64,
    seed: u64,
    max_abs_error: f64,
    tolerance: f64,
    passed: bool,
}

pub fn run(args: &SquareArgs) -> CliResult<Outcome> {
    let w = generate_wiener(args.steps, args.dt, args.seed)?;
    let x = fractional_power_path(&w, 0.5)?;
    let (y, max_abs_error) = square_path_check(&w);
    let passed = max_abs_error <= TOLERANCE;

    let mut out = OutputDir::create(&args.out)?;
    let rows = w
        .times()
        .zip(&w.values)
        .zip(x.values.iter().zip(&y.values))
        .map(|((t, wv), (xv, yv))| (t, *wv, xv.re, xv.im, yv.re));
    out.write_csv("square_check.csv", &["t", "w", "re_x", "im_x", "y_reconstructed"], rows)?;
    out.write_json(
        "summary.json",
        &Summary {
            command: NAME,
            steps: args.steps,
            dt: args.dt,
            seed: args.seed,
            max_abs_error,
            tolerance: TOLERANCE,
            passed,
        },
    )?;
    let manifest = out.finish(NAME, serde_json::to_value(args).expect("plain parameters"))?;
    Ok(Outcome {
        passed,
        lines: vec![format!(
            "{NAME}: max_abs_error = {max_abs_error:.3e} (tolerance {TOLERANCE:e}) {}",
            pass_fail(passed)
        )],
        manifest: Some(manifest),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::assert_outputs;

    fn args(out: PathBuf) -> SquareArgs {
        SquareArgs {
            steps: 10_000,
            dt: 1e-4,
            seed: FracConfig::default().seed,
            out,
        }
    }

    #[test]
    fn default_run_passes_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run(&args(dir.path().into())).unwrap();
        assert!(outcome.passed);
        assert_outputs("square_check", dir.path());
        let csv = std::fs::read_to_string(dir.path().join("square_check.csv")).unwrap();
        assert!(csv.starts_with("t,w,re_x,im_x,y_reconstructed\n"));
        assert_eq!(csv.lines().count(), 10_002);
    }

    #[test]
    fn single_step_gives_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        run(&SquareArgs { steps: 1, ..args(dir.path().into()) }).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("square_check.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn unwritable_output_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, b"x").unwrap();
        let err = run(&args(blocker.join("sub"))).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
