//! Complex Fokker–Planck equations on uniform grids.
//!
//! Every solver advances `∂ψ/∂t = L ψ` with the trapezoidal (Crank–Nicolson)
//! rule, `(I − ½dt L) ψⁿ⁺¹ = (I + ½dt L) ψⁿ`, where along one axis
//!
//! ```text
//! (Lψ)_j = (g_{j+1}ψ_{j+1} − g_{j−1}ψ_{j−1}) / 2dx + D (ψ_{j+1} − 2ψ_j + ψ_{j−1}) / dx²
//! ```
//!
//! The drift is discretised in divergence form, so `Σ_j ψ_j` is conserved
//! exactly on periodic grids whatever the drift profile `g`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest per-axis node count accepted by [`spinor_fp_step`] in 3D.
pub const MAX_AXIS_3D: usize = 64;
/// Largest per-axis node count accepted by [`spinor_fp_step`] in 4D.
pub const MAX_AXIS_4D: usize = 24;

/// Exponent bound used by [`gauge_transform`].
pub const GAUGE_EXPONENT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    nx: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        if nx < 3 {
            return Err(invalid("nx", format!("need at least 3 nodes, got {nx}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(invalid("x_max", "must exceed x_min"));
        }
        Ok(Self { x_min, x_max, nx })
    }

    /// Grid for a periodic domain of length `period`: the node at
    /// `x_min + period` is the image of node 0 and is not stored.
    pub fn periodic(x_min: f64, period: f64, nx: usize) -> Result<Self> {
        if nx < 3 {
            return Err(invalid("nx", format!("need at least 3 nodes, got {nx}")));
        }
        let dx = period / nx as f64;
        Self::new(x_min, x_min + dx * (nx - 1) as f64, nx)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    /// Period when the grid is used with periodic boundaries.
    pub fn period(&self) -> f64 {
        self.dx() * self.nx as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.dx() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Boundary {
    #[default]
    Periodic,
    DirichletZero,
}

/// Complex field on a tensor grid. Values are node-major with the last axis
/// varying fastest and components innermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CField {
    grids: Vec<Grid1D>,
    n_components: usize,
    values: Vec<Complex64>,
}

impl CField {
    pub fn new(grids: Vec<Grid1D>, n_components: usize, values: Vec<Complex64>) -> Result<Self> {
        if grids.is_empty() || n_components == 0 {
            return Err(invalid("grids", "need at least one axis and one component"));
        }
        let expected = grids.iter().map(Grid1D::nx).product::<usize>() * n_components;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: expected,
            });
        }
        Ok(Self {
            grids,
            n_components,
            values,
        })
    }

    pub fn zeros(grids: Vec<Grid1D>, n_components: usize) -> Result<Self> {
        let n = grids.iter().map(Grid1D::nx).product::<usize>() * n_components;
        Self::new(grids, n_components, vec![ZERO; n])
    }

    pub fn scalar(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![grid], 1, values)
    }

    pub fn scalar_from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self {
            grids: vec![grid],
            n_components: 1,
            values,
        }
    }

    /// Field with `f(coordinates, component)` at every node.
    pub fn from_fn(
        grids: Vec<Grid1D>,
        n_components: usize,
        f: impl Fn(&[f64], usize) -> Complex64,
    ) -> Result<Self> {
        let mut field = Self::zeros(grids, n_components)?;
        let mut coords = vec![0.0; field.grids.len()];
        for node in 0..field.n_nodes() {
            field.coordinates_into(node, &mut coords);
            for c in 0..n_components {
                field.values[node * n_components + c] = f(&coords, c);
            }
        }
        Ok(field)
    }

    pub fn grids(&self) -> &[Grid1D] {
        &self.grids
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grids[0]
    }

    pub fn dims(&self) -> usize {
        self.grids.len()
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn n_nodes(&self) -> usize {
        self.grids.iter().map(Grid1D::nx).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.grids.iter().map(Grid1D::dx).product()
    }

    fn stride(&self, axis: usize) -> usize {
        self.grids[axis + 1..].iter().map(Grid1D::nx).product()
    }

    fn coordinates_into(&self, node: usize, out: &mut [f64]) {
        let mut rest = node;
        for axis in (0..self.grids.len()).rev() {
            let n = self.grids[axis].nx();
            out[axis] = self.grids[axis].x(rest % n);
            rest /= n;
        }
    }

    pub fn coordinates(&self, node: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.grids.len()];
        self.coordinates_into(node, &mut out);
        out
    }

    /// `Σ ψ dV` over all nodes and components.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.cell_volume()
    }

    /// `Σ |ψ|² dV` over all nodes and components.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CField) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Complex centre `∫xψ / ∫ψ` of a one-dimensional scalar field.
    pub fn first_moment(&self) -> Result<Complex64> {
        self.require_scalar_1d()?;
        let grid = self.grids[0];
        let num: Complex64 = self.values.iter().enumerate().map(|(i, v)| v * grid.x(i)).sum();
        Ok(num / self.values.iter().sum::<Complex64>())
    }

    fn check_same_shape(&self, other: &CField) -> Result<()> {
        if self.values.len() != other.values.len() || self.n_components != other.n_components {
            return Err(Error::DimensionMismatch {
                left: self.values.len(),
                right: other.values.len(),
            });
        }
        Ok(())
    }

    fn require_scalar_1d(&self) -> Result<()> {
        if self.grids.len() != 1 || self.n_components != 1 {
            return Err(invalid("field", "expected a one-dimensional scalar field"));
        }
        Ok(())
    }

    fn check_real_field(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_nodes() {
            return Err(Error::DimensionMismatch {
                left: u.len(),
                right: self.n_nodes(),
            });
        }
        Ok(())
    }
}

/// Constant drift and diffusion of `∂ψ/∂t = drift·∂ψ/∂X + diffusion·∂²ψ/∂X²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FPCoeffs {
    pub drift: Complex64,
    pub diffusion: Complex64,
}

impl FPCoeffs {
    /// Free square-root process: drift `−(1+i)/4 + β(1−i)/2`, diffusion `−i/4`.
    pub fn square_root(beta: f64) -> Self {
        Self {
            drift: square_root_drift(beta),
            diffusion: Complex64::new(0.0, -0.25),
        }
    }

    /// Drift-free Schrödinger-type equation, diffusion `−i/4`.
    pub fn schrodinger() -> Self {
        Self {
            drift: ZERO,
            diffusion: Complex64::new(0.0, -0.25),
        }
    }

    /// Real heat equation `∂ψ/∂t = ∂²ψ/∂X²`.
    pub fn heat() -> Self {
        Self {
            drift: ZERO,
            diffusion: ONE,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.diffusion == ZERO {
            return Err(invalid("diffusion", "must be non-zero"));
        }
        Ok(())
    }
}

/// `−(1+i)/4 + β(1−i)/2`.
pub fn square_root_drift(beta: f64) -> Complex64 {
    Complex64::new(-0.25, -0.25) + Complex64::new(0.5 * beta, -0.5 * beta)
}

/// Tridiagonal matrix; row `i` reads `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1]`.
/// When periodic, `lower[0]` couples to `x[n−1]` and `upper[n−1]` to `x[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
    pub periodic: bool,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i] * x[i - 1];
                } else if self.periodic {
                    v += self.lower[0] * x[n - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                } else if self.periodic {
                    v += self.upper[n - 1] * x[0];
                }
                v
            })
            .collect()
    }

    /// `I + s·self`.
    fn shifted_identity(&self, s: Complex64) -> Self {
        Self {
            lower: self.lower.iter().map(|v| v * s).collect(),
            diag: self.diag.iter().map(|v| ONE + v * s).collect(),
            upper: self.upper.iter().map(|v| v * s).collect(),
            periodic: self.periodic,
        }
    }

    pub fn factor(&self) -> Result<TridiagonalSolver> {
        TridiagonalSolver::new(self)
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.factor()?.solve(rhs))
    }
}

/// Factored tridiagonal system. Open systems use Thomas elimination, cyclic
/// ones a Sherman–Morrison correction on top of it.
#[derive(Debug, Clone)]
pub struct TridiagonalSolver {
    lower: Vec<Complex64>,
    c_prime: Vec<Complex64>,
    denom: Vec<Complex64>,
    cyclic: Option<CyclicCorrection>,
}

#[derive(Debug, Clone)]
struct CyclicCorrection {
    z: Vec<Complex64>,
    gamma: Complex64,
    corner_top: Complex64,
    scale: Complex64,
}

impl TridiagonalSolver {
    fn new(m: &Tridiagonal) -> Result<Self> {
        let n = m.len();
        if n == 0 || m.lower.len() != n || m.upper.len() != n {
            return Err(invalid("matrix", "inconsistent tridiagonal bands"));
        }
        if !m.periodic {
            return Self::thomas(&m.lower, &m.diag, &m.upper);
        }
        if n < 3 {
            return Err(invalid("matrix", "cyclic systems need at least 3 rows"));
        }
        let corner_top = m.lower[0];
        let corner_bottom = m.upper[n - 1];
        let gamma = -m.diag[0];
        let mut diag = m.diag.clone();
        diag[0] -= gamma;
        diag[n - 1] -= corner_bottom * corner_top / gamma;
        let base = Self::thomas(&m.lower, &diag, &m.upper)?;
        let mut u = vec![ZERO; n];
        u[0] = gamma;
        u[n - 1] = corner_bottom;
        let z = base.solve(&u);
        let denom = ONE + z[0] + corner_top * z[n - 1] / gamma;
        if denom.norm() == 0.0 {
            return Err(Error::SingularMatrix);
        }
        Ok(Self {
            cyclic: Some(CyclicCorrection {
                z,
                gamma,
                corner_top,
                scale: ONE / denom,
            }),
            ..base
        })
    }

    fn thomas(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        let mut c_prime = vec![ZERO; n];
        let mut denom = vec![ZERO; n];
        for i in 0..n {
            let d = if i == 0 { diag[0] } else { diag[i] - lower[i] * c_prime[i - 1] };
            if d.norm() == 0.0 || !d.is_finite() {
                return Err(Error::SingularMatrix);
            }
            denom[i] = d;
            c_prime[i] = if i + 1 < n { upper[i] / d } else { ZERO };
        }
        Ok(Self {
            lower: lower.to_vec(),
            c_prime,
            denom,
            cyclic: None,
        })
    }

    fn thomas_solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.denom.len();
        let mut x = vec![ZERO; n];
        for i in 0..n {
            let prev = if i == 0 { ZERO } else { self.lower[i] * x[i - 1] };
            x[i] = (rhs[i] - prev) / self.denom[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = x[i + 1];
            x[i] -= self.c_prime[i] * next;
        }
        x
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let y = self.thomas_solve(rhs);
        match &self.cyclic {
            None => y,
            Some(c) => {
                let n = y.len();
                let factor = (y[0] + c.corner_top * y[n - 1] / c.gamma) * c.scale;
                y.iter().zip(&c.z).map(|(yi, zi)| yi - zi * factor).collect()
            }
        }
    }
}

/// Spatial operator `L` along one axis with per-node drift `g` and diffusion `d`.
pub fn axis_operator(g: &[Complex64], d: Complex64, dx: f64, boundary: Boundary) -> Tridiagonal {
    let n = g.len();
    let adv = 1.0 / (2.0 * dx);
    let dif = d / (dx * dx);
    let prev = |j: usize| if j == 0 { n - 1 } else { j - 1 };
    let next = |j: usize| if j + 1 == n { 0 } else { j + 1 };
    let lower = (0..n).map(|j| dif - g[prev(j)] * adv).collect();
    let upper = (0..n).map(|j| dif + g[next(j)] * adv).collect();
    let mut m = Tridiagonal {
        lower,
        diag: vec![dif * -2.0; n],
        upper,
        periodic: boundary == Boundary::Periodic,
    };
    if boundary == Boundary::DirichletZero {
        m.lower[0] = ZERO;
        m.upper[n - 1] = ZERO;
    }
    m
}

/// One Crank–Nicolson propagator `x ↦ (I − ½dt L)⁻¹(I + ½dt L)x`.
#[derive(Debug, Clone)]
pub struct CnStepper {
    explicit: Tridiagonal,
    implicit: TridiagonalSolver,
}

impl CnStepper {
    pub fn new(op: &Tridiagonal, dt: f64) -> Result<Self> {
        let half = Complex64::new(0.5 * dt, 0.0);
        Ok(Self {
            explicit: op.shifted_identity(half),
            implicit: op.shifted_identity(-half).factor()?,
        })
    }

    pub fn step(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.implicit.solve(&self.explicit.apply(x))
    }
}

fn step_count(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(invalid("t_final", "must be finite and non-negative"));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let n = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    Ok(if n == 0 { (0, dt) } else { (n, t_final / n as f64) })
}

fn evolve_1d(init: &CField, g: &[Complex64], d: Complex64, t_final: f64, dt: f64, boundary: Boundary) -> Result<CField> {
    init.require_scalar_1d()?;
    let (n_steps, h) = step_count(t_final, dt)?;
    let mut out = init.clone();
    if n_steps == 0 {
        return Ok(out);
    }
    let stepper = CnStepper::new(&axis_operator(g, d, init.grids[0].dx(), boundary), h)?;
    for _ in 0..n_steps {
        out.values = stepper.step(&out.values);
    }
    Ok(out)
}

/// Advances `∂ψ/∂t = drift·∂ψ/∂X + diffusion·∂²ψ/∂X²` to `t_final`. The step
/// is shrunk so that a whole number of steps lands on `t_final`.
pub fn solve_fp_free(init: &CField, coeffs: FPCoeffs, t_final: f64, dt: f64, boundary: Boundary) -> Result<CField> {
    coeffs.validate()?;
    let g = vec![coeffs.drift; init.n_nodes()];
    evolve_1d(init, &g, coeffs.diffusion, t_final, dt, boundary)
}

/// Advances `∂ψ/∂t = ∂/∂X[(−(1+i)/4 + (1−i)U/4)ψ] − (i/4)∂²ψ/∂X²` with `U`
/// sampled at the grid nodes.
pub fn solve_fp_potential(init: &CField, u: &[f64], t_final: f64, dt: f64, boundary: Boundary) -> Result<CField> {
    init.check_real_field(u)?;
    let g: Vec<Complex64> = u.iter().map(|&v| potential_drift(v)).collect();
    evolve_1d(init, &g, Complex64::new(0.0, -0.25), t_final, dt, boundary)
}

/// `−(1+i)/4 + (1−i)U/4`.
pub fn potential_drift(u: f64) -> Complex64 {
    Complex64::new(-0.25 + 0.25 * u, -0.25 - 0.25 * u)
}

pub fn heat_kernel(x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("t", "heat kernel needs t > 0"));
    }
    Ok((4.0 * PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp())
}

pub fn schrodinger_kernel(x: f64, t: f64) -> Result<Complex64> {
    schrodinger_kernel_at(x, Complex64::new(t, 0.0))
}

/// `(4πit)^{−1/2} exp(ix²/4t)` for complex `t`, principal square root.
pub fn schrodinger_kernel_at(x: f64, t: Complex64) -> Result<Complex64> {
    if t == ZERO {
        return Err(invalid("t", "kernel is singular at t = 0"));
    }
    let prefactor = (I * t * (4.0 * PI)).sqrt().inv();
    Ok(prefactor * (I * (x * x) / (t * 4.0)).exp())
}

/// Evolved normalised Gaussian of the heat equation `∂ψ/∂t = ∂²ψ/∂X²`:
/// initial variance `var0`, centre `x0`, evaluated after time `t`.
pub fn heat_gaussian(x: f64, x0: f64, var0: f64, t: f64) -> f64 {
    let var = var0 + 2.0 * t;
    (2.0 * PI * var).powf(-0.5) * (-(x - x0).powi(2) / (2.0 * var)).exp()
}

fn check_d(d: f64) -> Result<()> {
    if d == 0.0 || !d.is_finite() {
        return Err(invalid("D", "must be finite and non-zero"));
    }
    Ok(())
}

/// `V = |U'|²/4D − U''/2` by second-order differences: central inside,
/// three-point one-sided at the two end nodes.
pub fn map_potential(u: &[f64], grid: &Grid1D, d: f64) -> Result<Vec<f64>> {
    check_d(d)?;
    let n = u.len();
    if n != grid.nx() {
        return Err(Error::DimensionMismatch { left: n, right: grid.nx() });
    }
    let h = grid.dx();
    Ok((0..n)
        .map(|j| {
            let (du, d2u) = if j == 0 {
                ((-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h), (u[0] - 2.0 * u[1] + u[2]) / (h * h))
            } else if j == n - 1 {
                (
                    (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h),
                    (u[n - 1] - 2.0 * u[n - 2] + u[n - 3]) / (h * h),
                )
            } else {
                ((u[j + 1] - u[j - 1]) / (2.0 * h), (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h))
            };
            du * du / (4.0 * d) - 0.5 * d2u
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeDirection {
    /// `ψ = e^{U/2D} ψ̂`.
    Forward,
    /// `ψ̂ = e^{−U/2D} ψ`.
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeOutput {
    pub field: CField,
    /// Nodes whose exponent exceeded [`GAUGE_EXPONENT_LIMIT`] and was clamped.
    pub clamped_nodes: usize,
}

pub fn gauge_transform(field: &CField, u: &[f64], d: f64, direction: GaugeDirection) -> Result<GaugeOutput> {
    check_d(d)?;
    field.check_real_field(u)?;
    let sign = match direction {
        GaugeDirection::Forward => 1.0,
        GaugeDirection::Inverse => -1.0,
    };
    let mut out = field.clone();
    let mut clamped_nodes = 0;
    let nc = field.n_components;
    for (node, &uv) in u.iter().enumerate() {
        let mut e = sign * uv / (2.0 * d);
        if e.abs() > GAUGE_EXPONENT_LIMIT {
            e = e.clamp(-GAUGE_EXPONENT_LIMIT, GAUGE_EXPONENT_LIMIT);
            clamped_nodes += 1;
        }
        let w = e.exp();
        for v in &mut out.values[node * nc..(node + 1) * nc] {
            *v *= w;
        }
    }
    Ok(GaugeOutput { field: out, clamped_nodes })
}

/// Fourth-order central first derivative; `None` within two nodes of an end.
fn d1_4th<T>(f: &[T], j: usize, h: f64) -> Option<T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    (j >= 2 && j + 2 < f.len()).then(|| ((f[j - 2] - f[j + 2]) + (f[j + 1] - f[j - 1]) * 8.0) * (1.0 / (12.0 * h)))
}

/// Fourth-order central second derivative; `None` within two nodes of an end.
fn d2_4th<T>(f: &[T], j: usize, h: f64) -> Option<T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    (j >= 2 && j + 2 < f.len()).then(|| {
        ((f[j + 1] + f[j - 1]) * 16.0 - (f[j + 2] + f[j - 2]) - f[j] * 30.0) * (1.0 / (12.0 * h * h))
    })
}

/// Gradient-flow operator `D ∂(e^{−U/D} ∂(e^{U/D} ψ̂))` by nested fourth-order
/// differences. The four nodes nearest each end are left at zero.
pub fn gradient_flow_operator(psi_hat: &CField, u: &[f64], d: f64) -> Result<CField> {
    check_d(d)?;
    psi_hat.require_scalar_1d()?;
    psi_hat.check_real_field(u)?;
    let h = psi_hat.grids[0].dx();
    let n = u.len();
    let inner: Vec<Complex64> = psi_hat.values.iter().zip(u).map(|(p, &uv)| p * (uv / d).exp()).collect();
    let flux: Vec<Complex64> = (0..n)
        .map(|j| d1_4th(&inner, j, h).map_or(ZERO, |g| g * (-u[j] / d).exp()))
        .collect();
    let mut out = psi_hat.clone();
    for j in 0..n {
        out.values[j] = if (4..n.saturating_sub(4)).contains(&j) {
            d1_4th(&flux, j, h).unwrap_or(ZERO) * d
        } else {
            ZERO
        };
    }
    Ok(out)
}

/// `DΔψ − Vψ` with `V = |U'|²/4D − U''/2`, all by fourth-order differences.
/// The two nodes nearest each end are left at zero.
pub fn schrodinger_operator(psi: &CField, u: &[f64], d: f64) -> Result<CField> {
    check_d(d)?;
    psi.require_scalar_1d()?;
    psi.check_real_field(u)?;
    let h = psi.grids[0].dx();
    let mut out = psi.clone();
    for j in 0..u.len() {
        out.values[j] = match (d2_4th(&psi.values, j, h), d1_4th(u, j, h), d2_4th(u, j, h)) {
            (Some(lap), Some(du), Some(d2u)) => {
                let v = du * du / (4.0 * d) - 0.5 * d2u;
                lap * d - psi.values[j] * v
            }
            _ => ZERO,
        };
    }
    Ok(out)
}

/// Largest interior mismatch between `e^{U/2D}·(gradient flow ψ̂)` and
/// `(DΔ − V)(e^{U/2D} ψ̂)`, skipping the four nodes nearest each end.
pub fn operator_equivalence_defect(psi_hat: &CField, u: &[f64], d: f64) -> Result<f64> {
    let flow = gradient_flow_operator(psi_hat, u, d)?;
    let lhs = gauge_transform(&flow, u, d, GaugeDirection::Forward)?.field;
    let psi = gauge_transform(psi_hat, u, d, GaugeDirection::Forward)?.field;
    let rhs = schrodinger_operator(&psi, u, d)?;
    let n = u.len();
    Ok((4..n.saturating_sub(4))
        .map(|j| (lhs.values[j] - rhs.values[j]).norm())
        .fold(0.0, f64::max))
}

/// `−¼ψ'' + (k²X² − k/2)ψ` with periodic second differences.
pub fn harmonic_schrodinger_rhs(psi_star: &CField, k: f64) -> Result<CField> {
    psi_star.require_scalar_1d()?;
    let grid = psi_star.grids[0];
    let h2 = grid.dx() * grid.dx();
    let v = &psi_star.values;
    let n = v.len();
    let mut out = psi_star.clone();
    for j in 0..n {
        let lap = (v[(j + 1) % n] - v[j] * 2.0 + v[(j + n - 1) % n]) / h2;
        let x = grid.x(j);
        out.values[j] = lap * -0.25 + v[j] * (k * k * x * x - 0.5 * k);
    }
    Ok(out)
}

/// Diagonal metric signs of `∂²`: Euclidean in 3D, `(+,−,−,−)` in 4D.
pub fn metric_signs(dims: usize) -> Result<Vec<f64>> {
    match dims {
        3 => Ok(vec![1.0; 3]),
        4 => Ok(vec![1.0, -1.0, -1.0, -1.0]),
        other => Err(Error::UnsupportedDimension(other)),
    }
}

fn check_spinor(field: &CField, mu: &[Complex64], dims: usize) -> Result<()> {
    let limit = match dims {
        3 => MAX_AXIS_3D,
        4 => MAX_AXIS_4D,
        other => return Err(Error::UnsupportedDimension(other)),
    };
    if field.dims() != dims {
        return Err(Error::DimensionMismatch {
            left: field.dims(),
            right: dims,
        });
    }
    if field.n_components != 4 {
        return Err(Error::DimensionMismatch {
            left: field.n_components,
            right: 4,
        });
    }
    if mu.len() != dims {
        return Err(Error::DimensionMismatch { left: mu.len(), right: dims });
    }
    if let Some(g) = field.grids.iter().find(|g| g.nx() > limit) {
        return Err(Error::GridTooLarge(format!(
            "{} nodes per axis exceeds {limit} in {dims}D",
            g.nx()
        )));
    }
    Ok(())
}

/// One step of `∂Ψ/∂τ = Σ_k ∂_k(μ_k Ψ) − (i/4) Σ_k s_k ∂_k² Ψ` on a periodic
/// grid, with `s` from [`metric_signs`]. The axis operators commute, so the
/// step applies a Crank–Nicolson solve along each axis in turn; spinor
/// components evolve independently.
pub fn spinor_fp_step(field: &CField, mu: &[Complex64], dims: usize, dt: f64) -> Result<CField> {
    check_spinor(field, mu, dims)?;
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let signs = metric_signs(dims)?;
    let mut out = field.clone();
    let nc = field.n_components;
    for axis in 0..dims {
        let grid = field.grids[axis];
        let n = grid.nx();
        let d = Complex64::new(0.0, -0.25 * signs[axis]);
        let op = axis_operator(&vec![mu[axis]; n], d, grid.dx(), Boundary::Periodic);
        let stepper = CnStepper::new(&op, dt)?;
        let stride = field.stride(axis);
        let mut line = vec![ZERO; n];
        for start in (0..field.n_nodes()).filter(|node| (node / stride) % n == 0) {
            for c in 0..nc {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = out.values[(start + i * stride) * nc + c];
                }
                for (i, v) in stepper.step(&line).into_iter().enumerate() {
                    out.values[(start + i * stride) * nc + c] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Largest nodal modulus of `Σ_k μ_k ∂_kΨ − (i/4) Σ_k s_k ∂_k²Ψ` on a
/// periodic 4D grid (central differences). Zero marks a fixed point of the
/// fictitious-time flow.
pub fn klein_gordon_residual(field: &CField, mu: &[Complex64]) -> Result<f64> {
    check_spinor(field, mu, 4)?;
    let signs = metric_signs(4)?;
    let nc = field.n_components;
    let v = &field.values;
    let mut worst: f64 = 0.0;
    for node in 0..field.n_nodes() {
        for c in 0..nc {
            let mut r = ZERO;
            for axis in 0..4 {
                let n = field.grids[axis].nx();
                let h = field.grids[axis].dx();
                let stride = field.stride(axis);
                let i = (node / stride) % n;
                let up = node - i * stride + ((i + 1) % n) * stride;
                let down = node - i * stride + ((i + n - 1) % n) * stride;
                let (fp, f0, fm) = (v[up * nc + c], v[node * nc + c], v[down * nc + c]);
                r += mu[axis] * (fp - fm) / (2.0 * h);
                r -= I * 0.25 * signs[axis] * (fp - f0 * 2.0 + fm) / (h * h);
            }
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}
