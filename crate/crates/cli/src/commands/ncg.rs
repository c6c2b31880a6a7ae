use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fracwiener::clifford::{euclidean_gamma_basis, pauli_basis, CMatrix, CliffordBasis};
use fracwiener::ncg::{
    block_orthogonal_instance, build_y, build_z, complementary_instance, sphere_volume_density, Kappa, Sector, SpherePatch,
    ZConstruction, DEFAULT_FD_STEP, QUADRATURE_PHI_NODES, QUADRATURE_THETA_NODES,
};
use fracwiener::sde::wiener_rng;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::output::OutputDir;
use crate::{pass_fail, CliError, CliResult, Outcome};

pub const NAME: &str = "ncg-check";
pub const Y2_TOLERANCE: f64 = 1e-12;
pub const ZSPEC_TOLERANCE: f64 = 1e-10;
pub const VOLUME_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_SEED: u64 = 41_142_015;
const GENERIC_INSTANCES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Y2,
    Zspec,
    Volume,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct NcgArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    /// Random draws for `y2` and block instances for `zspec`.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = QUADRATURE_THETA_NODES)]
    pub n_theta: usize,
    #[arg(long, default_value_t = QUADRATURE_PHI_NODES)]
    pub n_phi: usize,
    #[arg(long, default_value_t = DEFAULT_FD_STEP)]
    pub fd_step: f64,
    /// Number of disjoint unit spheres in the volume check.
    #[arg(long, default_value_t = 1)]
    pub spheres: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

fn unit_vector(rng: &mut impl rand::Rng, dim: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return raw.iter().map(|x| x / norm).collect();
        }
    }
}

pub fn run(args: &NcgArgs) -> CliResult<Outcome> {
    match args.which {
        Which::Y2 => run_y2(args),
        Which::Zspec => run_zspec(args),
        Which::Volume => run_volume(args),
    }
}

#[derive(Serialize)]
struct Y2Summary {
    command: &'static str,
    which: &'static str,
    draws: usize,
    seed: u64,
    max_square_defect: f64,
    max_adjoint_defect: f64,
    tolerance: f64,
    passed: bool,
}

fn run_y2(args: &NcgArgs) -> CliResult<Outcome> {
    if args.draws == 0 {
        return Err(CliError::Usage("--draws must be at least 1".into()));
    }
    let pauli = pauli_basis();
    let gamma = euclidean_gamma_basis(3)?;
    let mut rng = wiener_rng(args.seed);
    let mut rows = Vec::with_capacity(args.draws);
    for draw in 0..args.draws {
        let (basis, name, dim): (&CliffordBasis, &str, usize) = if draw % 2 == 0 { (&pauli, "pauli", 3) } else { (&gamma, "gamma3", 4) };
        let kappa = if draw % 4 < 2 { Kappa::Plus } else { Kappa::Minus };
        let y = build_y(&unit_vector(&mut rng, dim), basis, kappa)?;
        rows.push((draw, name, kappa.value(), y.square_defect(), y.adjoint_defect()));
    }
    let max_square_defect = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let max_adjoint_defect = rows.iter().map(|r| r.4).fold(0.0, f64::max);
    let passed = max_square_defect <= Y2_TOLERANCE;

    let mut out = OutputDir::create(&args.out)?;
    out.write_csv("y2_draws.csv", &["draw", "basis", "kappa", "square_defect", "adjoint_defect"], &rows)?;
    out.write_json(
        "summary.json",
        &Y2Summary {
            command: NAME,
            which: "y2",
            draws: args.draws,
            seed: args.seed,
            max_square_defect,
            max_adjoint_defect,
            tolerance: Y2_TOLERANCE,
            passed,
        },
    )?;
    let manifest = out.finish(NAME, serde_json::to_value(args).expect("plain parameters"))?;
    Ok(Outcome {
        passed,
        lines: vec![format!(
            "{NAME} [y2]: {} draws, max |Y² − κI| = {max_square_defect:.3e} (tolerance {Y2_TOLERANCE:e}) {}",
            args.draws,
            pass_fail(passed)
        )],
        manifest: Some(manifest),
    })
}

#[derive(Serialize)]
struct ZReport {
    spectrum: Vec<[f64; 2]>,
    distance_to_one_or_i: f64,
    idempotency_defect: f64,
}

impl From<&ZConstruction> for ZReport {
    fn from(z: &ZConstruction) -> Self {
        Self {
            spectrum: z.spectrum.iter().map(|l| [l.re, l.im]).collect(),
            distance_to_one_or_i: z.distance_to_one_or_i(),
            idempotency_defect: z.idempotency_defect,
        }
    }
}

#[derive(Serialize)]
struct ZSummary {
    command: &'static str,
    which: &'static str,
    draws: usize,
    seed: u64,
    tolerance: f64,
    /// Asserted: every block-orthogonal instance.
    block_max_distance: f64,
    block_within_tolerance: usize,
    block_example: ZReport,
    /// Reported only: half-projections that sum to the identity.
    complementary: ZReport,
    /// Reported only: random Euclidean coordinates and random C.
    generic: Vec<ZReport>,
    passed: bool,
}

fn random_invertible(rng: &mut impl rand::Rng, n: usize) -> CMatrix {
    let mut m = CMatrix::identity(n);
    for r in 0..n {
        for c in 0..n {
            let z = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
            m.set(r, c, m.get(r, c) + z * 0.5);
        }
    }
    m
}

fn run_zspec(args: &NcgArgs) -> CliResult<Outcome> {
    if args.draws == 0 {
        return Err(CliError::Usage("--draws must be at least 1".into()));
    }
    let mut rng = wiener_rng(args.seed);
    let mut block = Vec::with_capacity(args.draws);
    for _ in 0..args.draws {
        let plus = unit_vector(&mut rng, 3);
        let minus = unit_vector(&mut rng, 3);
        let (yp, ym, c) = block_orthogonal_instance([plus[0], plus[1], plus[2]], [minus[0], minus[1], minus[2]])?;
        block.push(build_z(&yp, &ym, &c)?);
    }
    let (yp, ym, c) = complementary_instance();
    let complementary = build_z(&yp, &ym, &c)?;
    let gamma = euclidean_gamma_basis(3)?;
    let mut generic = Vec::with_capacity(GENERIC_INSTANCES);
    while generic.len() < GENERIC_INSTANCES {
        let yp = build_y(&unit_vector(&mut rng, 4), &gamma, Kappa::Plus)?;
        let ym = build_y(&unit_vector(&mut rng, 4), &gamma, Kappa::Minus)?;
        let c = random_invertible(&mut rng, 4);
        match build_z(&yp.matrix, &ym.matrix, &c) {
            Ok(z) => generic.push(z),
            Err(fracwiener::Error::SingularMatrix) => continue,
            Err(e) => return Err(e.into()),
        }
    }

    let distances: Vec<f64> = block.iter().map(ZConstruction::distance_to_one_or_i).collect();
    let block_max_distance = distances.iter().copied().fold(0.0, f64::max);
    let block_within_tolerance = distances.iter().filter(|d| **d <= ZSPEC_TOLERANCE).count();
    let passed = block_within_tolerance == block.len();

    let mut out = OutputDir::create(&args.out)?;
    let rows = block.iter().enumerate().flat_map(|(i, z)| {
        z.spectrum
            .iter()
            .enumerate()
            .map(move |(j, l)| (i, j, l.re, l.im, (l - Complex64::new(1.0, 0.0)).norm().min((l - Complex64::i()).norm())))
    });
    out.write_csv("zspec_block.csv", &["instance", "eigen_index", "re", "im", "distance_to_one_or_i"], rows)?;
    let summary = ZSummary {
        command: NAME,
        which: "zspec",
        draws: args.draws,
        seed: args.seed,
        tolerance: ZSPEC_TOLERANCE,
        block_max_distance,
        block_within_tolerance,
        block_example: (&block[0]).into(),
        complementary: (&complementary).into(),
        generic: generic.iter().map(ZReport::from).collect(),
        passed,
    };
    out.write_json("summary.json", &summary)?;
    let manifest = out.finish(NAME, serde_json::to_value(args).expect("plain parameters"))?;

    let fmt_spec = |r: &ZReport| {
        r.spectrum
            .iter()
            .map(|[re, im]| format!("{re:+.4}{im:+.4}i"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut lines = vec![
        format!(
            "{NAME} [zspec]: block-orthogonal {}/{} within {ZSPEC_TOLERANCE:e} of {{1, i}}, max distance {block_max_distance:.3e} {}",
            block_within_tolerance,
            block.len(),
            pass_fail(passed)
        ),
        format!("{NAME} [zspec]: block example spectrum {}", fmt_spec(&summary.block_example)),
        format!("{NAME} [zspec]: complementary (E = I) spectrum {}", fmt_spec(&summary.complementary)),
    ];
    for (i, g) in summary.generic.iter().enumerate() {
        lines.push(format!("{NAME} [zspec]: generic #{i} spectrum {}", fmt_spec(g)));
    }
    Ok(Outcome {
        passed,
        lines,
        manifest: Some(manifest),
    })
}

#[derive(Serialize)]
struct VolumeSummary {
    command: &'static str,
    which: &'static str,
    n_theta: usize,
    n_phi: usize,
    fd_step: f64,
    spheres: usize,
    single_sphere_volume: f64,
    total_volume: f64,
    expected_volume: f64,
    abs_error: f64,
    tolerance: f64,
    passed: bool,
}

fn run_volume(args: &NcgArgs) -> CliResult<Outcome> {
    if args.spheres == 0 {
        return Err(CliError::Usage("--spheres must be at least 1".into()));
    }
    let patch = SpherePatch::new(args.n_theta, args.n_phi)?.with_fd_step(args.fd_step)?;
    let density = sphere_volume_density(&patch, Sector::Plus);
    let single = density.integral();
    let total: f64 = (0..args.spheres).map(|_| single).sum();
    let expected = 4.0 * PI * args.spheres as f64;
    let tolerance = VOLUME_TOLERANCE * args.spheres as f64;
    let abs_error = (total - expected).abs();
    let passed = abs_error <= tolerance;

    let mut out = OutputDir::create(&args.out)?;
    let n_phi = density.phis.len();
    let rows = density
        .values
        .iter()
        .zip(&density.weights)
        .enumerate()
        .map(|(i, (v, w))| (density.thetas[i / n_phi], density.phis[i % n_phi], *v, *w));
    out.write_csv("density.csv", &["theta", "phi", "value", "weight"], rows)?;
    out.write_json(
        "summary.json",
        &VolumeSummary {
            command: NAME,
            which: "volume",
            n_theta: args.n_theta,
            n_phi: args.n_phi,
            fd_step: args.fd_step,
            spheres: args.spheres,
            single_sphere_volume: single,
            total_volume: total,
            expected_volume: expected,
            abs_error,
            tolerance,
            passed,
        },
    )?;
    let manifest = out.finish(NAME, serde_json::to_value(args).expect("plain parameters"))?;
    Ok(Outcome {
        passed,
        lines: vec![format!(
            "{NAME} [volume]: {} sphere(s), volume = {total:.10} vs 4π·n = {expected:.10}, error {abs_error:.3e} (tolerance {tolerance:e}) {}",
            args.spheres,
            pass_fail(passed)
        )],
        manifest: Some(manifest),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_outputs, read_json};

    fn args(which: Which, out: PathBuf) -> NcgArgs {
        NcgArgs {
            which,
            draws: 1000,
            seed: DEFAULT_SEED,
            n_theta: QUADRATURE_THETA_NODES,
            n_phi: QUADRATURE_PHI_NODES,
            fd_step: DEFAULT_FD_STEP,
            spheres: 1,
            out,
        }
    }

    #[test]
    fn y2_and_volume_pass() {
        for which in [Which::Y2, Which::Volume] {
            let dir = tempfile::tempdir().unwrap();
            let outcome = run(&args(which, dir.path().into())).unwrap();
            assert!(outcome.passed, "{:?}", outcome.lines);
            assert_outputs("ncg_check", dir.path());
        }
    }

    #[test]
    fn volume_counts_spheres() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run(&NcgArgs { spheres: 3, n_theta: 32, n_phi: 64, ..args(Which::Volume, dir.path().into()) }).unwrap();
        assert!(outcome.passed);
        let s = read_json(&dir.path().join("summary.json"));
        assert!((s["total_volume"].as_f64().unwrap() - 12.0 * PI).abs() < 3e-6);
    }

    #[test]
    fn zspec_reports_block_spectra_outside_one_and_i() {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run(&NcgArgs { draws: 20, ..args(Which::Zspec, dir.path().into()) }).unwrap();
        assert!(!outcome.passed);
        assert_eq!(outcome.exit_code(), 1);
        assert_outputs("ncg_check", dir.path());
        let s = read_json(&dir.path().join("summary.json"));
        assert_eq!(s["complementary"]["distance_to_one_or_i"].as_f64().unwrap(), 0.0);
        assert_eq!(s["generic"].as_array().unwrap().len(), GENERIC_INSTANCES);
    }
}
