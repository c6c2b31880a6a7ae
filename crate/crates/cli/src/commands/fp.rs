use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fracwiener::fokker_planck::{
    heat_gaussian, klein_gordon_residual, solve_fp_free, solve_fp_potential, spinor_fp_step, square_root_drift, Boundary, CField,
    FPCoeffs, Grid1D,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::output::OutputDir;
use crate::{pass_fail, CliError, CliResult, Outcome};

pub const NAME: &str = "fp-solve";
pub const HEAT_TOLERANCE: f64 = 1e-3;
pub const PROBE_TOLERANCE: f64 = 1e-8;
/// Largest `max|ψ(dt) − ψ(dt/2)| / max|ψ(dt)|` accepted as a resolved run.
pub const MAX_RELATIVE_GAP: f64 = 0.5;
/// Initial amplitudes of the four spinor components.
const SPINOR_WEIGHTS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FpMode {
    /// Square-root process with drift parameter `--beta`.
    Free,
    /// Harmonic potential `U = k x²/2`.
    Potential,
    Spinor3,
    Spinor4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Periodic,
    Dirichlet,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Dirichlet => Boundary::DirichletZero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FpArgs {
    #[arg(long, value_enum)]
    pub mode: FpMode,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub k: f64,
    /// Scalar modes: left end of the grid.
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub x_max: f64,
    /// Nodes per axis [default: 801 scalar, 32 spinor3, 12 spinor4].
    #[arg(long)]
    pub nx: Option<usize>,
    /// Spinor modes: period of every axis.
    #[arg(long, default_value_t = 8.0)]
    pub length: f64,
    /// [default: 0.5 scalar, 0.01 spinor]
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Initial Gaussian variance [default: (4·dx)² scalar, 0.5 spinor].
    #[arg(long)]
    pub var0: Option<f64>,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
    pub boundary: BoundaryArg,
    /// Also evolve the heat configuration and compare with the analytic Gaussian.
    #[arg(long)]
    pub heat_check: bool,
    /// Spinor4 only: Klein–Gordon residual of the discrete plane-wave fixed point.
    #[arg(long)]
    pub residual_probe: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

impl FpArgs {
    fn is_spinor(&self) -> bool {
        matches!(self.mode, FpMode::Spinor3 | FpMode::Spinor4)
    }

    fn t_final(&self) -> f64 {
        self.t_final.unwrap_or(if self.is_spinor() { 0.01 } else { 0.5 })
    }

    fn nx(&self) -> usize {
        self.nx.unwrap_or(match self.mode {
            FpMode::Free | FpMode::Potential => 801,
            FpMode::Spinor3 => 32,
            FpMode::Spinor4 => 12,
        })
    }
}

#[derive(Serialize, Default)]
struct Diagnostics {
    mode: &'static str,
    t_final: f64,
    dt: f64,
    nx: usize,
    integral_initial: [f64; 2],
    integral_final: [f64; 2],
    integral_drift: f64,
    norm_sq_initial: f64,
    norm_sq_final: f64,
    max_abs_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_moment_final: Option<[f64; 2]>,
    /// `max |ψ(dt) − ψ(dt/2)|` at `t_final`.
    self_convergence_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    heat_linf_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    klein_gordon_residual_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe_control_residual: Option<f64>,
    passed: bool,
}

#[derive(Serialize)]
struct Summary {
    command: &'static str,
    diagnostics: Diagnostics,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn resolved(field: &CField, half: &CField) -> CliResult<f64> {
    let gap = field.max_abs_diff(half)?;
    let scale = field.max_abs().max(half.max_abs());
    if gap.is_finite() && gap <= MAX_RELATIVE_GAP * scale {
        Ok(gap)
    } else {
        Err(CliError::Numerical(format!(
            "runs with dt and dt/2 disagree by {gap:.3e} against a field maximum of {scale:.3e}; \
             refine dt/grid or shrink the domain"
        )))
    }
}

fn finite(field: &CField, what: &str) -> CliResult<()> {
    if field.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{what} produced non-finite values")))
    }
}

pub fn run(args: &FpArgs) -> CliResult<Outcome> {
    if args.residual_probe && args.mode != FpMode::Spinor4 {
        return Err(CliError::Usage("--residual-probe requires --mode spinor4".into()));
    }
    if args.heat_check && args.is_spinor() {
        return Err(CliError::Usage("--heat-check applies to scalar modes".into()));
    }
    if let Some(v) = args.var0 {
        if !(v > 0.0) {
            return Err(CliError::Usage("--var0 must be positive".into()));
        }
    }
    if args.is_spinor() {
        run_spinor(args)
    } else {
        run_scalar(args)
    }
}

fn run_scalar(args: &FpArgs) -> CliResult<Outcome> {
    let grid = Grid1D::new(args.x_min, args.x_max, args.nx())?;
    let var0 = args.var0.unwrap_or((4.0 * grid.dx()).powi(2));
    let t_final = args.t_final();
    let boundary: Boundary = args.boundary.into();
    let init = CField::scalar_from_fn(grid, |x| Complex64::new(heat_gaussian(x, args.x0, var0, 0.0), 0.0));
    let u: Vec<f64> = grid.nodes().iter().map(|x| 0.5 * args.k * x * x).collect();
    let solve = |dt: f64| match args.mode {
        FpMode::Potential => solve_fp_potential(&init, &u, t_final, dt, boundary),
        _ => solve_fp_free(&init, FPCoeffs::square_root(args.beta), t_final, dt, boundary),
    };
    let field = solve(args.dt)?;
    finite(&field, "solver")?;
    let half = solve(0.5 * args.dt)?;
    let gap = resolved(&field, &half)?;

    let mut diag = Diagnostics {
        mode: if args.mode == FpMode::Potential { "potential" } else { "free" },
        t_final,
        dt: args.dt,
        nx: grid.nx(),
        integral_initial: pair(init.integral()),
        integral_final: pair(field.integral()),
        integral_drift: (field.integral() - init.integral()).norm(),
        norm_sq_initial: init.norm_sq(),
        norm_sq_final: field.norm_sq(),
        max_abs_final: field.max_abs(),
        first_moment_final: Some(pair(field.first_moment()?)),
        self_convergence_gap: gap,
        passed: true,
        ..Diagnostics::default()
    };
    if args.heat_check {
        let heat = solve_fp_free(&init, FPCoeffs::heat(), t_final, args.dt, boundary)?;
        let err = heat
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - heat_gaussian(grid.x(i), args.x0, var0, t_final)).norm())
            .fold(0.0, f64::max);
        diag.heat_linf_error = Some(err);
        diag.passed = err <= HEAT_TOLERANCE;
    }

    let mut out = OutputDir::create(&args.out)?;
    out.write_csv(
        "field.csv",
        &["x", "re", "im"],
        field.values().iter().enumerate().map(|(i, v)| (grid.x(i), v.re, v.im)),
    )?;
    finish(out, args, diag)
}

/// Plane wave along axis 0 with phase step θ = 2π/n and spacing tan(θ/2),
/// on which the drift −½ annihilates the discrete Klein–Gordon operator.
fn plane_wave_probe(n: usize, control_beta: f64) -> CliResult<(f64, f64)> {
    let theta = 2.0 * PI / n as f64;
    let dx0 = (theta / 2.0).tan();
    let mut grids = vec![Grid1D::periodic(0.0, dx0 * n as f64, n)?];
    grids.extend((1..4).map(|_| Grid1D::periodic(0.0, 4.0, 4)).collect::<fracwiener::Result<Vec<_>>>()?);
    let eta = [Complex64::new(0.5, 0.5), Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(0.3, 0.2)];
    let field = CField::from_fn(grids, 4, |x, c| Complex64::from_polar(1.0, theta * x[0] / dx0) * eta[c])?;
    let mut mu = vec![square_root_drift(-0.5); 4];
    let fixed = klein_gordon_residual(&field, &mu)?;
    mu[0] = square_root_drift(control_beta);
    Ok((fixed, klein_gordon_residual(&field, &mu)?))
}

fn run_spinor(args: &FpArgs) -> CliResult<Outcome> {
    let dims = if args.mode == FpMode::Spinor3 { 3 } else { 4 };
    let grid = Grid1D::periodic(-0.5 * args.length, args.length, args.nx())?;
    let var0 = args.var0.unwrap_or(0.5);
    let t_final = args.t_final();
    if !(t_final >= 0.0 && t_final.is_finite() && args.dt > 0.0) {
        return Err(CliError::Usage("--t-final must be non-negative and --dt positive".into()));
    }
    let init = CField::from_fn(vec![grid; dims], 4, |x, c| {
        let r2: f64 = x.iter().map(|v| (v - args.x0) * (v - args.x0)).sum();
        Complex64::new(SPINOR_WEIGHTS[c] * (-r2 / (2.0 * var0)).exp(), 0.0)
    })?;
    let mu = vec![square_root_drift(args.beta); dims];
    let evolve = |dt: f64| -> CliResult<CField> {
        let n = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
        let mut f = init.clone();
        for _ in 0..n {
            f = spinor_fp_step(&f, &mu, dims, t_final / n as f64)?;
        }
        Ok(f)
    };
    let field = evolve(args.dt)?;
    finite(&field, "spinor step")?;
    let half = evolve(0.5 * args.dt)?;
    let gap = resolved(&field, &half)?;

    let mut diag = Diagnostics {
        mode: if dims == 3 { "spinor3" } else { "spinor4" },
        t_final,
        dt: args.dt,
        nx: grid.nx(),
        integral_initial: pair(init.integral()),
        integral_final: pair(field.integral()),
        integral_drift: (field.integral() - init.integral()).norm(),
        norm_sq_initial: init.norm_sq(),
        norm_sq_final: field.norm_sq(),
        max_abs_final: field.max_abs(),
        self_convergence_gap: gap,
        passed: true,
        ..Diagnostics::default()
    };
    if dims == 4 {
        diag.klein_gordon_residual_final = Some(klein_gordon_residual(&field, &mu)?);
    }
    if args.residual_probe {
        let (fixed, control) = plane_wave_probe(args.nx(), args.beta)?;
        diag.probe_residual = Some(fixed);
        diag.probe_control_residual = Some(control);
        diag.passed = fixed <= PROBE_TOLERANCE;
    }

    let mut out = OutputDir::create(&args.out)?;
    let mut headers: Vec<String> = (0..dims).map(|a| format!("x{a}")).collect();
    headers.extend(["component", "re", "im"].map(String::from));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let values = field.values();
    let rows = (0..field.n_nodes()).flat_map(|node| {
        let coords = field.coordinates(node);
        (0..4).map(move |c| {
            let v = values[node * 4 + c];
            let mut row: Vec<f64> = coords.clone();
            row.extend([c as f64, v.re, v.im]);
            row
        })
    });
    out.write_csv("field.csv", &header_refs, rows)?;
    finish(out, args, diag)
}

fn finish(mut out: OutputDir, args: &FpArgs, diag: Diagnostics) -> CliResult<Outcome> {
    let mut lines = vec![format!(
        "{NAME} [{}]: t = {}, integral drift = {:.3e}, self-convergence gap = {:.3e}",
        diag.mode, diag.t_final, diag.integral_drift, diag.self_convergence_gap
    )];
    if let Some(e) = diag.heat_linf_error {
        lines.push(format!("{NAME}: heat check L-inf error = {e:.3e} (tolerance {HEAT_TOLERANCE:e}) {}", pass_fail(diag.passed)));
    }
    if let Some(r) = diag.klein_gordon_residual_final {
        lines.push(format!("{NAME}: klein_gordon_residual (evolved field) = {r:.3e}"));
    }
    if let (Some(r), Some(c)) = (diag.probe_residual, diag.probe_control_residual) {
        lines.push(format!(
            "{NAME}: klein_gordon_residual (plane-wave probe) = {r:.3e}, control = {c:.3e} {}",
            pass_fail(r <= PROBE_TOLERANCE)
        ));
    }
    let passed = diag.passed;
    out.write_json("summary.json", &Summary { command: NAME, diagnostics: diag })?;
    let manifest = out.finish(NAME, serde_json::to_value(args).expect("plain parameters"))?;
    Ok(Outcome {
        passed,
        lines,
        manifest: Some(manifest),
    })
}
