use fracwiener::fokker_planck;
use fracwiener::montecarlo::{self, kernel_default_config};
use fracwiener::ncg;
use fracwiener::sde::{self, FracConfig};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pyfracwiener, FracError, PyValueError);

fn to_py(e: fracwiener::Error) -> PyErr {
    FracError::new_err(e.to_string())
}

/// Brownian path values `W(t_0) .. W(t_n)` with `W(0) = 0`.
#[pyfunction]
#[pyo3(signature = (n_steps, dt, seed))]
fn generate_wiener(n_steps: usize, dt: f64, seed: u64) -> PyResult<Vec<f64>> {
    Ok(sde::generate_wiener(n_steps, dt, seed).map_err(to_py)?.values)
}

/// Principal-branch `W^{1/2}` along a seeded path, as complex values.
#[pyfunction]
#[pyo3(signature = (n_steps, dt, seed, alpha = 0.5))]
fn fractional_power_path(n_steps: usize, dt: f64, seed: u64, alpha: f64) -> PyResult<Vec<Complex64>> {
    let w = sde::generate_wiener(n_steps, dt, seed).map_err(to_py)?;
    Ok(sde::fractional_power_path(&w, alpha).map_err(to_py)?.values)
}

/// Largest gap between `W` and the re-accumulated squares of its `(ΔW)^½` increments.
#[pyfunction]
#[pyo3(signature = (n_steps = 10_000, dt = 1e-4, seed = FracConfig::default().seed))]
fn square_check(n_steps: usize, dt: f64, seed: u64) -> PyResult<f64> {
    let w = sde::generate_wiener(n_steps, dt, seed).map_err(to_py)?;
    Ok(sde::square_path_check(&w).1)
}

#[pyfunction]
fn heat_kernel(x: f64, t: f64) -> PyResult<f64> {
    fokker_planck::heat_kernel(x, t).map_err(to_py)
}

/// Free Schrödinger propagator at complex time; `t = -i s` gives the heat kernel.
#[pyfunction]
fn schrodinger_kernel(x: f64, t: Complex64) -> PyResult<Complex64> {
    fokker_planck::schrodinger_kernel_at(x, t).map_err(to_py)
}

/// Heat and Wick-rotated square-root kernel fits at the calibrated settings.
#[pyfunction]
#[pyo3(signature = (paths = montecarlo::KERNEL_DEFAULT_PATHS, seed = montecarlo::KERNEL_DEFAULT_SEED, workers = None))]
fn kernel_experiment<'py>(py: Python<'py>, paths: usize, seed: u64, workers: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let exp = py
        .detach(|| montecarlo::kernel_experiment(&kernel_default_config(), paths, seed, None, workers))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("mu_bm", exp.fit_bm.mu_hat)?;
    out.set_item("sigma_bm", exp.fit_bm.sigma_hat)?;
    out.set_item("mu_sqrt", exp.fit_sqrt.mu_hat)?;
    out.set_item("sigma_sqrt", exp.fit_sqrt.sigma_hat)?;
    out.set_item("sigma_ratio", exp.sigma_ratio)?;
    out.set_item("analytic_sigma_ratio", montecarlo::analytic_sigma_ratio(exp.config.dt))?;
    out.set_item("normality_p", exp.normality_sqrt.p_value)?;
    Ok(out)
}

/// Identity error and residual z-score of the Itô-reduced Dirac square.
#[pyfunction]
#[pyo3(signature = (dims = 3, samples = 100_000, dt = 0.01, mu = 0.5, seed = 1_928, workers = None))]
fn dirac_check<'py>(
    py: Python<'py>,
    dims: usize,
    samples: usize,
    dt: f64,
    mu: f64,
    seed: u64,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let ens = py
        .detach(|| montecarlo::dirac_ensemble(dims, samples, dt, mu, seed, workers))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("max_identity_error", ens.max_identity_error())?;
    out.set_item("max_z_score", ens.max_z_score())?;
    Ok(out)
}

/// Quadrature estimate of the summed volume of `n_spheres` unit spheres.
#[pyfunction]
#[pyo3(signature = (n_spheres = 1))]
fn sphere_volume(n_spheres: usize) -> PyResult<f64> {
    ncg::volume_quantization_check(n_spheres).map_err(to_py)
}

#[pymodule]
fn pyfracwiener(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", fracwiener::VERSION)?;
    m.add("FracError", m.py().get_type::<FracError>())?;
    m.add_function(wrap_pyfunction!(generate_wiener, m)?)?;
    m.add_function(wrap_pyfunction!(fractional_power_path, m)?)?;
    m.add_function(wrap_pyfunction!(square_check, m)?)?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(schrodinger_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(dirac_check, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_volume, m)?)?;
    Ok(())
}
