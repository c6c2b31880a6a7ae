//! Seeded path ensembles, per-sample Wick rotation, normal fits and the
//! Brownian-versus-square-root kernel experiment.
//!
//! Every path draws from its own generator seeded by
//! [`derive_path_seed`]`(master_seed, index)` and results are collected in
//! index order, so an ensemble is bit-identical for any worker count.

use num_complex::Complex64;
use rand::RngExt;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::clifford::dirac_basis;
use crate::error::{invalid, Error, Result};
use crate::sde::{
    derive_path_seed, dirac3_increment_parts, dirac4_increment_parts, wiener_rng, fractional_power_path, generate_wiener, principal_power, sqrt_increment_scalar,
    sqrt_path_with_potential, wick_real, CPath, FracConfig, SqrtFormula,
};

/// Time step of the calibrated kernel experiment; gives σ_sqrt/σ_bm ≈ 2.
pub const KERNEL_DEFAULT_DT: f64 = 0.04;
/// Number of steps of the calibrated kernel experiment (horizon t = 1).
pub const KERNEL_DEFAULT_STEPS: usize = 25;
pub const KERNEL_DEFAULT_PATHS: usize = 10_000;
pub const KERNEL_DEFAULT_SEED: u64 = 1_502_061;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqrtVariant {
    /// Free-scale formula with `cfg.mu0`.
    Tentative,
    /// μ₀ = ½ formula with drift `cfg.beta`.
    Drift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Process {
    Wiener,
    /// Direct α-power of the increments, α = `cfg.alpha`.
    PowerEm,
    SqrtFormula(SqrtVariant),
    WithPotential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub n_paths: usize,
    pub terminal_values: Vec<Complex64>,
    pub paths: Option<Vec<CPath>>,
    pub config: FracConfig,
    pub master_seed: u64,
    pub process: Process,
}

/// Runs `f` on a pool with `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(invalid("workers", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| invalid("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// One path of `process` driven by the Wiener path with seed `seed`.
pub fn simulate_path(cfg: &FracConfig, seed: u64, process: Process) -> Result<CPath> {
    let w = generate_wiener(cfg.n_steps, cfg.dt, seed)?;
    match process {
        Process::Wiener => Ok(CPath {
            dt: w.dt,
            values: w.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }),
        Process::PowerEm => fractional_power_path(&w, cfg.alpha),
        Process::SqrtFormula(variant) => {
            let formula = match variant {
                SqrtVariant::Tentative => SqrtFormula::Tentative { mu0: cfg.mu0 },
                SqrtVariant::Drift => SqrtFormula::Drift { beta: cfg.beta },
            };
            let incs = w
                .increments()
                .map(|d| sqrt_increment_scalar(d, w.dt, formula))
                .collect::<Result<Vec<_>>>()?;
            Ok(CPath::from_increments(w.dt, incs))
        }
        Process::WithPotential => sqrt_path_with_potential(cfg, &w),
    }
}

pub fn run_ensemble(cfg: &FracConfig, n_paths: usize, master_seed: u64, process: Process) -> Result<Ensemble> {
    run_ensemble_with(cfg, n_paths, master_seed, process, None, false)
}

/// Full form of [`run_ensemble`]: explicit worker count and optional
/// retention of whole paths.
pub fn run_ensemble_with(
    cfg: &FracConfig,
    n_paths: usize,
    master_seed: u64,
    process: Process,
    workers: Option<usize>,
    keep_paths: bool,
) -> Result<Ensemble> {
    cfg.validate()?;
    if n_paths == 0 {
        return Err(invalid("n_paths", "must be at least 1"));
    }
    let paths: Vec<CPath> = with_workers(workers, || {
        (0..n_paths)
            .into_par_iter()
            .map(|i| simulate_path(cfg, derive_path_seed(master_seed, i as u64), process))
            .collect::<Result<Vec<_>>>()
    })??;
    let terminal_values = paths.iter().map(CPath::terminal).collect();
    Ok(Ensemble {
        n_paths,
        terminal_values,
        paths: keep_paths.then_some(paths),
        config: cfg.clone(),
        master_seed,
        process,
    })
}

/// Real samples from complex ones, see [`wick_real`].
pub fn wick_rotate_samples(values: &[Complex64]) -> Vec<f64> {
    values.iter().copied().map(wick_real).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFit {
    pub mu_hat: f64,
    pub sigma_hat: f64,
    pub mu_ci: (f64, f64),
    pub sigma_ci: (f64, f64),
    pub n: usize,
}

impl NormalFit {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.sigma_hat / (self.n as f64).sqrt()
    }

    /// `mu_hat` lies within `k` standard errors of `value`.
    pub fn mean_consistent_with(&self, value: f64, k: f64) -> bool {
        (self.mu_hat - value).abs() <= k * self.std_error()
    }
}

/// Normal fit with 95% intervals: Student-t for the mean, chi-square for σ.
pub fn fit_normal(samples: &[f64]) -> Result<NormalFit> {
    fit_normal_summary(samples.len(), mean(samples), sample_std(samples))
}

/// Same intervals as [`fit_normal`] from `(n, mean, std)` alone.
pub fn fit_normal_summary(n: usize, mu_hat: f64, sigma_hat: f64) -> Result<NormalFit> {
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let dof = (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| invalid("samples", e.to_string()))?;
    let half = t.inverse_cdf(0.975) * sigma_hat / (n as f64).sqrt();
    let chi = ChiSquared::new(dof).map_err(|e| invalid("samples", e.to_string()))?;
    let lo = sigma_hat * (dof / chi.inverse_cdf(0.975)).sqrt();
    let hi = sigma_hat * (dof / chi.inverse_cdf(0.025)).sqrt();
    Ok(NormalFit {
        mu_hat,
        sigma_hat,
        mu_ci: (mu_hat - half, mu_hat + half),
        sigma_ci: (lo, hi),
        n,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with the n−1 denominator.
pub fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Counts normalised to a probability density.
    pub fn density(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(c, w)| *c as f64 / (total * (w[1] - w[0])))
            .collect()
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Freedman–Diaconis bin count, `h = 2·IQR·n^{-1/3}`.
pub fn freedman_diaconis_bins(samples: &[f64]) -> usize {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if iqr <= 0.0 || range <= 0.0 {
        return 1;
    }
    let h = 2.0 * iqr / (samples.len() as f64).cbrt();
    ((range / h).ceil() as usize).clamp(1, 10_000)
}

/// Equal-width histogram over the sample range; `bins = None` selects
/// Freedman–Diaconis.
pub fn histogram(samples: &[f64], bins: Option<usize>) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let bins = bins.unwrap_or_else(|| freedman_diaconis_bins(samples));
    if bins == 0 {
        return Err(invalid("bins", "must be at least 1"));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

/// Pearson chi-square goodness of fit against the fitted normal, using
/// `bins` cells of equal probability (two fitted parameters).
pub fn chi_square_normality(samples: &[f64], bins: usize) -> Result<ChiSquareTest> {
    if bins < 4 {
        return Err(invalid("bins", "need at least 4 cells"));
    }
    let fit = fit_normal(samples)?;
    if fit.sigma_hat <= 0.0 {
        return Err(invalid("samples", "zero variance"));
    }
    let normal = Normal::new(fit.mu_hat, fit.sigma_hat).map_err(|e| invalid("samples", e.to_string()))?;
    let cuts: Vec<f64> = (1..bins).map(|j| normal.inverse_cdf(j as f64 / bins as f64)).collect();
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let i = cuts.partition_point(|&c| c <= x);
        counts[i] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let statistic = counts
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    let dof = bins - 3;
    let chi = ChiSquared::new(dof as f64).map_err(|e| invalid("bins", e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: 1.0 - chi.cdf(statistic),
        bins,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelExperiment {
    pub config: FracConfig,
    pub n_paths: usize,
    pub master_seed: u64,
    pub fit_bm: NormalFit,
    pub fit_sqrt: NormalFit,
    pub sigma_ratio: f64,
    pub hist_bm: Histogram,
    pub hist_sqrt: Histogram,
    pub normality_bm: ChiSquareTest,
    pub normality_sqrt: ChiSquareTest,
    pub bm_samples: Vec<f64>,
    pub sqrt_samples: Vec<f64>,
}

/// Expected `σ_sqrt / σ_bm` for step `dt`: each summand of the Wick-rotated
/// sum has variance `E|ΔW| = (2dt/π)^½`.
pub fn analytic_sigma_ratio(dt: f64) -> f64 {
    (2.0 / std::f64::consts::PI).powf(0.25) * dt.powf(-0.25)
}

pub fn kernel_default_config() -> FracConfig {
    FracConfig {
        alpha: 0.5,
        dt: KERNEL_DEFAULT_DT,
        n_steps: KERNEL_DEFAULT_STEPS,
        seed: KERNEL_DEFAULT_SEED,
        ..FracConfig::default()
    }
}

/// Brownian terminal values and Wick-rotated terminal values of the direct
/// square-root process, both driven by the same per-path seeds, then fitted,
/// histogrammed and tested for normality (20 equiprobable cells).
pub fn kernel_experiment(
    cfg: &FracConfig,
    n_paths: usize,
    seed: u64,
    bins: Option<usize>,
    workers: Option<usize>,
) -> Result<KernelExperiment> {
    cfg.validate()?;
    if n_paths < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n_paths });
    }
    let pairs: Vec<(f64, f64)> = with_workers(workers, || {
        (0..n_paths)
            .into_par_iter()
            .map(|i| {
                let w = generate_wiener(cfg.n_steps, cfg.dt, derive_path_seed(seed, i as u64))?;
                let x: Complex64 = w.increments().map(|d| principal_power(d, 0.5)).sum();
                Ok((w.terminal(), wick_real(x)))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let (bm_samples, sqrt_samples): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let fit_bm = fit_normal(&bm_samples)?;
    let fit_sqrt = fit_normal(&sqrt_samples)?;
    Ok(KernelExperiment {
        config: cfg.clone(),
        n_paths,
        master_seed: seed,
        sigma_ratio: fit_sqrt.sigma_hat / fit_bm.sigma_hat,
        hist_bm: histogram(&bm_samples, bins)?,
        hist_sqrt: histogram(&sqrt_samples, bins)?,
        normality_bm: chi_square_normality(&bm_samples, 20)?,
        normality_sqrt: chi_square_normality(&sqrt_samples, 20)?,
        fit_bm,
        fit_sqrt,
        bm_samples,
        sqrt_samples,
    })
}

/// Monte Carlo statistics of the squared Dirac increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracEnsemble {
    pub dims: usize,
    pub n_samples: usize,
    pub dt: f64,
    pub mu: f64,
    pub seed: u64,
    /// `|identity component of (dE)² − Σ_k s_k dW_k|` per sample, with
    /// `s_k = −η^{kk}` (all `+1` for the three spatial processes).
    pub identity_errors: Vec<f64>,
    pub identity_expected: Vec<f64>,
    /// Row-major ensemble mean of `(dE)² − (identity component)·I`.
    pub residual_mean: Vec<Complex64>,
    /// Standard errors of the real and imaginary parts of each entry;
    /// zero when fewer than two samples are drawn.
    pub residual_se_re: Vec<f64>,
    pub residual_se_im: Vec<f64>,
}

impl DiracEnsemble {
    pub fn max_identity_error(&self) -> f64 {
        self.identity_errors.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|mean| / SE` over all real and imaginary parts; entries
    /// that vanish in every sample are skipped.
    pub fn max_z_score(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, m) in self.residual_mean.iter().enumerate() {
            for (value, se) in [(m.re, self.residual_se_re[i]), (m.im, self.residual_se_im[i])] {
                if se > 0.0 {
                    worst = worst.max(value.abs() / se);
                } else if value != 0.0 {
                    return f64::INFINITY;
                }
            }
        }
        worst
    }

    pub fn mean_within(&self, k: f64) -> bool {
        self.n_samples >= 2 && self.max_z_score() <= k
    }
}

/// Draws `n_samples` independent increment sets `dW_k ~ N(0, dt)` (three
/// spatial or four processes, all `μ_k = mu`), squares the Dirac increment
/// under the Itô table and accumulates the non-identity residual.
pub fn dirac_ensemble(dims: usize, n_samples: usize, dt: f64, mu: f64, seed: u64, workers: Option<usize>) -> Result<DiracEnsemble> {
    if dims != 3 && dims != 4 {
        return Err(invalid("dims", format!("must be 3 or 4, got {dims}")));
    }
    if n_samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", "must be positive"));
    }
    let basis = dirac_basis();
    let generators: Vec<usize> = if dims == 3 { vec![1, 2, 3] } else { vec![0, 1, 2, 3] };
    let signs: Vec<f64> = generators.iter().map(|&k| -basis.metric(k)).collect();
    let sd = dt.sqrt();
    let per_sample = with_workers(workers, || {
        (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = wiener_rng(derive_path_seed(seed, i as u64));
                let dw: Vec<f64> = (0..dims).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
                let square = if dims == 3 {
                    dirac3_increment_parts([dw[0], dw[1], dw[2]], dt, [mu; 3], &basis)?.ito_square()
                } else {
                    dirac4_increment_parts([dw[0], dw[1], dw[2], dw[3]], dt, [mu; 4], &basis)?.ito_square()
                };
                let expected: f64 = dw.iter().zip(&signs).map(|(d, s)| d * s).sum();
                let id = square.identity_component();
                let residual: Vec<Complex64> = (0..4)
                    .flat_map(|r| (0..4).map(move |c| (r, c)))
                    .map(|(r, c)| square.get(r, c) - if r == c { id } else { Complex64::default() })
                    .collect();
                Ok(((id - Complex64::new(expected, 0.0)).norm(), expected, residual))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let n = n_samples as f64;
    let mut mean = vec![Complex64::default(); 16];
    for (_, _, r) in &per_sample {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let (mut se_re, mut se_im) = (vec![0.0; 16], vec![0.0; 16]);
    if n_samples >= 2 {
        for (_, _, r) in &per_sample {
            for j in 0..16 {
                se_re[j] += (r[j].re - mean[j].re).powi(2);
                se_im[j] += (r[j].im - mean[j].im).powi(2);
            }
        }
        for j in 0..16 {
            se_re[j] = (se_re[j] / (n - 1.0) / n).sqrt();
            se_im[j] = (se_im[j] / (n - 1.0) / n).sqrt();
        }
    }
    let (identity_errors, identity_expected) = per_sample.iter().map(|(e, x, _)| (*e, *x)).unzip();
    Ok(DiracEnsemble {
        dims,
        n_samples,
        dt,
        mu,
        seed,
        identity_errors,
        identity_expected,
        residual_mean: mean,
        residual_se_re: se_re,
        residual_se_im: se_im,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wick_rotation_values() {
        let out = wick_rotate_samples(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, 0.7),
        ]);
        assert_eq!(out[0], 1.0);
        assert_eq!(out[1], -1.0);
        assert_eq!(out[2], 0.0);
        assert!((out[3] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn wick_rotation_swap_antisymmetry() {
        let v = Complex64::new(0.25, -1.5);
        let swapped = Complex64::new(v.im, v.re);
        assert_eq!(wick_real(v), -wick_real(swapped));
    }

    #[test]
    fn constant_samples_fit() {
        let fit = fit_normal(&[2.5; 10]).unwrap();
        assert_eq!(fit.mu_hat, 2.5);
        assert_eq!(fit.sigma_hat, 0.0);
        assert_eq!(fit.mu_ci, (2.5, 2.5));
        assert!(fit_normal(&[1.0]).is_err());
    }

    #[test]
    fn ci_brackets_estimates() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let fit = fit_normal(&xs).unwrap();
        assert!(fit.mu_ci.0 <= fit.mu_hat && fit.mu_hat <= fit.mu_ci.1);
        assert!(fit.sigma_ci.0 <= fit.sigma_hat && fit.sigma_hat <= fit.sigma_ci.1);
    }

    #[test]
    fn histogram_counts_everything() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let h = histogram(&xs, None).unwrap();
        assert_eq!(h.total(), 1000);
        let h = histogram(&xs, Some(7)).unwrap();
        assert_eq!(h.counts.len(), 7);
        assert_eq!(h.total(), 1000);
        let dens: f64 = h.density().iter().zip(h.edges.windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum();
        assert!((dens - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_path_ensemble_matches_direct() {
        let cfg = FracConfig {
            n_steps: 50,
            dt: 0.01,
            ..FracConfig::default()
        };
        let e = run_ensemble(&cfg, 1, 42, Process::PowerEm).unwrap();
        let direct = simulate_path(&cfg, derive_path_seed(42, 0), Process::PowerEm).unwrap();
        assert_eq!(e.terminal_values[0], direct.terminal());
        assert!(run_ensemble(&cfg, 0, 42, Process::Wiener).is_err());
    }

    #[test]
    fn ensemble_independent_of_workers() {
        let cfg = FracConfig {
            n_steps: 20,
            dt: 0.05,
            ..FracConfig::default()
        };
        let one = run_ensemble_with(&cfg, 64, 3, Process::SqrtFormula(SqrtVariant::Drift), Some(1), false).unwrap();
        let many = run_ensemble_with(&cfg, 64, 3, Process::SqrtFormula(SqrtVariant::Drift), Some(8), false).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn dirac_ensemble_identity_and_worker_invariance() {
        for dims in [3, 4] {
            let a = dirac_ensemble(dims, 500, 0.01, 0.5, 3, Some(1)).unwrap();
            let b = dirac_ensemble(dims, 500, 0.01, 0.5, 3, Some(4)).unwrap();
            assert_eq!(a, b);
            assert!(a.max_identity_error() <= 1e-12);
            assert!(a.max_z_score().is_finite());
        }
        let single = dirac_ensemble(3, 1, 0.01, 0.5, 3, None).unwrap();
        assert!(!single.mean_within(3.0));
        assert!(single.residual_se_re.iter().all(|s| *s == 0.0));
        assert!(dirac_ensemble(5, 10, 0.01, 0.5, 3, None).is_err());
    }
}
