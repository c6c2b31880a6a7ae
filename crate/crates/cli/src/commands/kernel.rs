use std::path::PathBuf;

use clap::Args;
use fracwiener::montecarlo::{
    analytic_sigma_ratio, kernel_experiment, ChiSquareTest, Histogram, NormalFit, KERNEL_DEFAULT_DT, KERNEL_DEFAULT_PATHS,
    KERNEL_DEFAULT_SEED, KERNEL_DEFAULT_STEPS,
};
use fracwiener::sde::FracConfig;
use serde::{Deserialize, Serialize};

use crate::output::OutputDir;
use crate::{pass_fail, CliError, CliResult, Outcome};

pub const NAME: &str = "kernel-experiment";
pub const MIN_PATHS: usize = 100;
pub const MEAN_SE_MULTIPLE: f64 = 3.0;
pub const NORMALITY_P_MIN: f64 = 0.01;
pub const RATIO_RANGE: (f64, f64) = (1.8, 2.2);

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct KernelArgs {
    #[arg(long, default_value_t = KERNEL_DEFAULT_PATHS)]
    pub paths: usize,
    #[arg(long, default_value_t = KERNEL_DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = KERNEL_DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, default_value_t = KERNEL_DEFAULT_SEED)]
    pub seed: u64,
    /// Histogram bins; Freedman–Diaconis when omitted.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct FitReport {
    n: usize,
    mu_hat: f64,
    sigma_hat: f64,
    mu_ci: [f64; 2],
    sigma_ci: [f64; 2],
    std_error: f64,
    report: String,
}

impl From<&NormalFit> for FitReport {
    fn from(f: &NormalFit) -> Self {
        Self {
            n: f.n,
            mu_hat: f.mu_hat,
            sigma_hat: f.sigma_hat,
            mu_ci: [f.mu_ci.0, f.mu_ci.1],
            sigma_ci: [f.sigma_ci.0, f.sigma_ci.1],
            std_error: f.std_error(),
            report: format!(
                "mu_hat={:.6} [{:.6}, {:.6}], sigma_hat={:.6} [{:.6}, {:.6}]",
                f.mu_hat, f.mu_ci.0, f.mu_ci.1, f.sigma_hat, f.sigma_ci.0, f.sigma_ci.1
            ),
        }
    }
}

#[derive(Serialize)]
struct Normality {
    statistic: f64,
    dof: usize,
    p_value: f64,
    cells: usize,
}

impl From<&ChiSquareTest> for Normality {
    fn from(t: &ChiSquareTest) -> Self {
        Self {
            statistic: t.statistic,
            dof: t.dof,
            p_value: t.p_value,
            cells: t.bins,
        }
    }
}

#[derive(Serialize)]
struct Checks {
    means_within_3se: bool,
    sqrt_normality_p_above_0_01: bool,
    sigma_ratio_in_range: bool,
}

#[derive(Serialize)]
struct Summary {
    command: &'static str,
    paths: usize,
    steps: usize,
    dt: f64,
    seed: u64,
    heat_kernel: FitReport,
    schrodinger_kernel: FitReport,
    sigma_ratio: f64,
    analytic_sigma_ratio: f64,
    sigma_ratio_range: [f64; 2],
    normality_bm: Normality,
    normality_sqrt_wick: Normality,
    checks: Checks,
    passed: bool,
}

fn histogram_rows(h: &Histogram) -> impl Iterator<Item = (f64, f64, f64, u64, f64)> + '_ {
    let centers = h.centers();
    let density = h.density();
    (0..h.counts.len()).map(move |i| (h.edges[i], h.edges[i + 1], centers[i], h.counts[i], density[i]))
}

pub fn run(args: &KernelArgs, workers: Option<usize>) -> CliResult<Outcome> {
    if args.paths < MIN_PATHS {
        return Err(CliError::Usage(format!("--paths must be at least {MIN_PATHS}, got {}", args.paths)));
    }
    let cfg = FracConfig {
        alpha: 0.5,
        dt: args.dt,
        n_steps: args.steps,
        seed: args.seed,
        ..FracConfig::default()
    };
    let exp = kernel_experiment(&cfg, args.paths, args.seed, args.bins, workers)?;
    let checks = Checks {
        means_within_3se: exp.fit_bm.mean_consistent_with(0.0, MEAN_SE_MULTIPLE)
            && exp.fit_sqrt.mean_consistent_with(0.0, MEAN_SE_MULTIPLE),
        sqrt_normality_p_above_0_01: exp.normality_sqrt.p_value > NORMALITY_P_MIN,
        sigma_ratio_in_range: (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&exp.sigma_ratio),
    };
    let passed = checks.means_within_3se && checks.sqrt_normality_p_above_0_01 && checks.sigma_ratio_in_range;

    let mut out = OutputDir::create(&args.out)?;
    let headers = ["left", "right", "center", "count", "density"];
    out.write_csv("hist_bm.csv", &headers, histogram_rows(&exp.hist_bm))?;
    out.write_csv("hist_sqrt_wick.csv", &headers, histogram_rows(&exp.hist_sqrt))?;
    out.write_csv(
        "samples.csv",
        &["path", "bm", "sqrt_wick"],
        exp.bm_samples.iter().zip(&exp.sqrt_samples).enumerate().map(|(i, (b, s))| (i, *b, *s)),
    )?;
    let summary = Summary {
        command: NAME,
        paths: args.paths,
        steps: args.steps,
        dt: args.dt,
        seed: args.seed,
        heat_kernel: (&exp.fit_bm).into(),
        schrodinger_kernel: (&exp.fit_sqrt).into(),
        sigma_ratio: exp.sigma_ratio,
        analytic_sigma_ratio: analytic_sigma_ratio(args.dt),
        sigma_ratio_range: [RATIO_RANGE.0, RATIO_RANGE.1],
        normality_bm: (&exp.normality_bm).into(),
        normality_sqrt_wick: (&exp.normality_sqrt).into(),
        checks,
        passed,
    };
    out.write_json("summary.json", &summary)?;
    let manifest = out.finish(NAME, serde_json::to_value(args).expect("plain parameters"))?;
    Ok(Outcome {
        passed,
        lines: vec![
            format!("{NAME}: heat kernel        {}", summary.heat_kernel.report),
            format!("{NAME}: Schrödinger kernel {}", summary.schrodinger_kernel.report),
            format!(
                "{NAME}: sigma ratio {:.4} (analytic {:.4}), sqrt normality p = {:.3} {}",
                summary.sigma_ratio,
                summary.analytic_sigma_ratio,
                summary.normality_sqrt_wick.p_value,
                pass_fail(passed)
            ),
        ],
        manifest: Some(manifest),
    })
}
