use std::path::PathBuf;

use clap::Args;
use fracwiener::montecarlo::dirac_ensemble;
use serde::{Deserialize, Serialize};

use crate::output::OutputDir;
use crate::{pass_fail, CliError, CliResult, Outcome};

pub const NAME: &str = "dirac-check";
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const Z_THRESHOLD: f64 = 3.0;
pub const DEFAULT_SEED: u64 = 1_928;

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DiracArgs {
    /// 3 spatial processes, or 4 with the chirality matrix.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(3..=4))]
    pub dims: u8,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Common scale μ_k of every process.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    command: &'static str,
    dims: u8,
    samples: usize,
    seed: u64,
    dt: f64,
    mu: f64,
    max_identity_error: f64,
    identity_tolerance: f64,
    /// Largest |mean| / SE over residual entries; absent for a single sample.
    max_z_score: Option<f64>,
    z_threshold: f64,
    mean_check: &'static str,
    passed: bool,
}

pub fn run(args: &DiracArgs, workers: Option<usize>) -> CliResult<Outcome> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let ens = dirac_ensemble(args.dims as usize, args.samples, args.dt, args.mu, args.seed, workers)?;
    let max_identity_error = ens.max_identity_error();
    let identity_ok = max_identity_error <= IDENTITY_TOLERANCE;
    let (max_z_score, mean_check) = if ens.n_samples >= 2 {
        let z = ens.max_z_score();
        (Some(z), if z <= Z_THRESHOLD { "passed" } else { "failed" })
    } else {
        (None, "skipped")
    };
    let passed = identity_ok && mean_check != "failed";

    let mut out = OutputDir::create(&args.out)?;
    out.write_csv(
        "identity.csv",
        &["sample", "expected", "abs_error"],
        ens.identity_expected.iter().zip(&ens.identity_errors).enumerate().map(|(i, (x, e))| (i, *x, *e)),
    )?;
    out.write_csv(
        "residual.csv",
        &["row", "col", "mean_re", "mean_im", "se_re", "se_im"],
        (0..16).map(|j| {
            let m = ens.residual_mean[j];
            (j / 4, j % 4, m.re, m.im, ens.residual_se_re[j], ens.residual_se_im[j])
        }),
    )?;
    out.write_json(
        "summary.json",
        &Summary {
            command: NAME,
            dims: args.dims,
            samples: args.samples,
            seed: args.seed,
            dt: args.dt,
            mu: args.mu,
            max_identity_error,
            identity_tolerance: IDENTITY_TOLERANCE,
            max_z_score,
            z_threshold: Z_THRESHOLD,
            mean_check,
            passed,
        },
    )?;
    let manifest = out.finish(NAME, serde_json::to_value(args).expect("plain parameters"))?;
    let z_text = max_z_score.map_or("n/a".to_string(), |z| format!("{z:.3}"));
    Ok(Outcome {
        passed,
        lines: vec![format!(
            "{NAME} [dims {}]: {} samples, max identity error {max_identity_error:.3e}, max residual |mean|/SE {z_text} ({mean_check}) {}",
            args.dims,
            args.samples,
            pass_fail(passed)
        )],
        manifest: Some(manifest),
    })
}
