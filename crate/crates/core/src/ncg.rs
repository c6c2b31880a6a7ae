//! Finite-dimensional shadows of volume quantization: Clifford coordinates
//! `Y = Γ^A Y^A`, the projector construction `Z = 2ECEC⁻¹ − I`, and the
//! volume density of the unit sphere with its quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{pauli_basis, BasisKind, CMatrix, CliffordBasis, I, ONE};
use crate::error::{invalid, Error, Result};

pub const DEFAULT_THETA_NODES: usize = 64;
pub const DEFAULT_PHI_NODES: usize = 128;
pub const QUADRATURE_THETA_NODES: usize = 256;
pub const QUADRATURE_PHI_NODES: usize = 512;
/// Step of the central differences taken on the embedding.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kappa {
    /// Hermitian coordinate, `Y² = I`.
    Plus,
    /// Anti-Hermitian coordinate, `Y² = −I`.
    Minus,
}

impl Kappa {
    pub fn value(self) -> f64 {
        match self {
            Kappa::Plus => 1.0,
            Kappa::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YCoordinate {
    pub matrix: CMatrix,
    pub coeffs: Vec<f64>,
    pub kappa: Kappa,
    /// `Σ_A (Y^A)²`; the square of the matrix is `κ·norm_sq·I`.
    pub norm_sq: f64,
    pub is_unit: bool,
}

impl YCoordinate {
    /// `max |Y² − κI|`.
    pub fn square_defect(&self) -> f64 {
        let sq = &self.matrix * &self.matrix;
        let target = CMatrix::scalar(self.matrix.dim(), Complex64::new(self.kappa.value(), 0.0));
        sq.max_abs_diff(&target).unwrap_or(f64::INFINITY)
    }

    /// `max |Y† − κY|`.
    pub fn adjoint_defect(&self) -> f64 {
        let target = self.matrix.scale_real(self.kappa.value());
        self.matrix.adjoint().max_abs_diff(&target).unwrap_or(f64::INFINITY)
    }
}

/// `Σ_A Y^A Γ^A` for κ = +1, and `i Σ_A Y^A Γ^A` for κ = −1.
pub fn build_y(coeffs: &[f64], basis: &CliffordBasis, kappa: Kappa) -> Result<YCoordinate> {
    if matches!(basis.kind, BasisKind::DiracMinkowski) {
        return Err(Error::WrongBasis {
            expected: "Euclidean",
            got: basis.kind.to_string(),
        });
    }
    if coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            left: coeffs.len(),
            right: basis.len(),
        });
    }
    let mut matrix = CMatrix::zeros(basis.dim());
    for (y, g) in coeffs.iter().zip(&basis.generators) {
        matrix = &matrix + &g.scale_real(*y);
    }
    if kappa == Kappa::Minus {
        matrix = matrix.scale(I);
    }
    let norm_sq: f64 = coeffs.iter().map(|y| y * y).sum();
    Ok(YCoordinate {
        matrix,
        coeffs: coeffs.to_vec(),
        kappa,
        norm_sq,
        is_unit: (norm_sq - 1.0).abs() <= 1e-12,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZConstruction {
    pub e: CMatrix,
    pub z: CMatrix,
    pub spectrum: Vec<Complex64>,
    /// `max |E² − E|`.
    pub idempotency_defect: f64,
}

impl ZConstruction {
    /// Largest distance from an eigenvalue of `Z` to the nearer of `1` and `i`.
    pub fn distance_to_one_or_i(&self) -> f64 {
        self.spectrum
            .iter()
            .map(|l| (l - ONE).norm().min((l - I).norm()))
            .fold(0.0, f64::max)
    }
}

/// `E = (1+Y₊)/2 + (1+iY₋)/2` and `Z = 2ECEC⁻¹ − I` with the spectrum of `Z`.
pub fn build_z(y_plus: &CMatrix, y_minus: &CMatrix, c: &CMatrix) -> Result<ZConstruction> {
    let n = y_plus.dim();
    for m in [y_minus, c] {
        if m.dim() != n {
            return Err(Error::DimensionMismatch { left: n, right: m.dim() });
        }
    }
    let id = CMatrix::identity(n);
    let half = Complex64::new(0.5, 0.0);
    let e = &(&id + y_plus).scale(half) + &(&id + &y_minus.scale(I)).scale(half);
    let c_inv = c.inverse()?;
    let z = &(&(&(&e * c) * &e) * &c_inv).scale_real(2.0) - &id;
    let spectrum = z.eigenvalues()?;
    let idempotency_defect = (&e * &e).max_abs_diff(&e)?;
    Ok(ZConstruction {
        e,
        z,
        spectrum,
        idempotency_defect,
    })
}

/// `[[0, I], [I, 0]]` on two blocks of size `block`.
pub fn block_swap(block: usize) -> CMatrix {
    let zero = CMatrix::zeros(block);
    let id = CMatrix::identity(block);
    CMatrix::from_blocks(&zero, &id, &id, &zero).expect("square blocks of equal size")
}

/// Coordinates whose half-projections live on orthogonal 2×2 blocks:
/// `Y₊ = y₊ ⊕ (−I)` and `Y₋ = iI ⊕ y₋` with `y₊ = Σ a_k σ_k`,
/// `y₋ = i Σ b_k σ_k`, together with the block swap as `C`.
pub fn block_orthogonal_instance(plus: [f64; 3], minus: [f64; 3]) -> Result<(CMatrix, CMatrix, CMatrix)> {
    let pauli = pauli_basis();
    let yp = build_y(&plus, &pauli, Kappa::Plus)?;
    let ym = build_y(&minus, &pauli, Kappa::Minus)?;
    if !yp.is_unit || !ym.is_unit {
        return Err(invalid("coeffs", "block coordinates need unit coefficients"));
    }
    let zero = CMatrix::zeros(2);
    let neg = CMatrix::scalar(2, -ONE);
    let imag = CMatrix::scalar(2, I);
    let y_plus = CMatrix::from_blocks(&yp.matrix, &zero, &zero, &neg)?;
    let y_minus = CMatrix::from_blocks(&imag, &zero, &zero, &ym.matrix)?;
    Ok((y_plus, y_minus, block_swap(2)))
}

/// Block instance whose two half-projections are complementary, so `E = I`.
pub fn complementary_instance() -> (CMatrix, CMatrix, CMatrix) {
    let sign = CMatrix::from_blocks(
        &CMatrix::identity(2),
        &CMatrix::zeros(2),
        &CMatrix::zeros(2),
        &CMatrix::scalar(2, -ONE),
    )
    .expect("square blocks of equal size");
    let y_minus = sign.scale(I);
    (sign, y_minus, block_swap(2))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out[i] = (-z, w);
        out[n - 1 - i] = (z, w);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    Plus,
    Minus,
    Both,
}

impl Sector {
    fn multiplicity(self) -> f64 {
        match self {
            Sector::Plus | Sector::Minus => 1.0,
            Sector::Both => 2.0,
        }
    }
}

/// Unit sphere sampled on a Gauss–Legendre grid in θ and a uniform periodic
/// grid in φ. Derivatives of the embedding use central differences of step
/// `fd_step`, independent of the quadrature grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpherePatch {
    pub thetas: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phis: Vec<f64>,
    pub fd_step: f64,
}

impl SpherePatch {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 3 {
            return Err(invalid(
                "grid",
                format!("degenerate sphere grid {n_theta}×{n_phi}"),
            ));
        }
        let (thetas, theta_weights) = gauss_legendre(n_theta)
            .into_iter()
            .map(|(x, w)| (0.5 * PI * (x + 1.0), 0.5 * PI * w))
            .unzip();
        let phis = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        Ok(Self {
            thetas,
            theta_weights,
            phis,
            fd_step: DEFAULT_FD_STEP,
        })
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Result<Self> {
        if !(fd_step > 0.0) {
            return Err(invalid("fd_step", "must be positive"));
        }
        self.fd_step = fd_step;
        Ok(self)
    }

    pub fn embedding(theta: f64, phi: f64) -> [f64; 3] {
        [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
    }

    /// `½ ε^{μν} ε_{ABC} Y^A ∂_μY^B ∂_νY^C` with `ε^{θφ} = ε_{123} = +1`,
    /// times the number of sectors in `which`.
    pub fn density_at(&self, theta: f64, phi: f64, which: Sector) -> f64 {
        let h = self.fd_step;
        let diff = |a: [f64; 3], b: [f64; 3]| [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h), (a[2] - b[2]) / (2.0 * h)];
        let y = Self::embedding(theta, phi);
        let d_theta = diff(Self::embedding(theta + h, phi), Self::embedding(theta - h, phi));
        let d_phi = diff(Self::embedding(theta, phi + h), Self::embedding(theta, phi - h));
        let cross = [
            d_theta[1] * d_phi[2] - d_theta[2] * d_phi[1],
            d_theta[2] * d_phi[0] - d_theta[0] * d_phi[2],
            d_theta[0] * d_phi[1] - d_theta[1] * d_phi[0],
        ];
        which.multiplicity() * (y[0] * cross[0] + y[1] * cross[1] + y[2] * cross[2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereDensity {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// θ-major: `values[i * phis.len() + j]` sits at `(thetas[i], phis[j])`.
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SphereDensity {
    /// Quadrature sum, accumulated in node order.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

pub fn sphere_volume_density(patch: &SpherePatch, which: Sector) -> SphereDensity {
    let n_phi = patch.phis.len();
    let phi_weight = 2.0 * PI / n_phi as f64;
    let mut values = Vec::with_capacity(patch.thetas.len() * n_phi);
    let mut weights = Vec::with_capacity(values.capacity());
    for (&theta, &wt) in patch.thetas.iter().zip(&patch.theta_weights) {
        for &phi in &patch.phis {
            values.push(patch.density_at(theta, phi, which));
            weights.push(wt * phi_weight);
        }
    }
    SphereDensity {
        thetas: patch.thetas.clone(),
        phis: patch.phis.clone(),
        values,
        weights,
    }
}

/// Total volume of `n_spheres` disjoint unit-sphere patches, each integrated
/// on `patch` in a single sector.
pub fn volume_quantization_check_with(patch: &SpherePatch, n_spheres: usize) -> f64 {
    (0..n_spheres)
        .map(|_| sphere_volume_density(patch, Sector::Plus).integral())
        .sum()
}

/// [`volume_quantization_check_with`] on the 256×512 quadrature grid.
pub fn volume_quantization_check(n_spheres: usize) -> Result<f64> {
    let patch = SpherePatch::new(QUADRATURE_THETA_NODES, QUADRATURE_PHI_NODES)?;
    Ok(volume_quantization_check_with(&patch, n_spheres))
}

/// Whether an eigenvalue list lies within `tol` of `{1, i}`.
pub fn spectrum_in_one_or_i(spectrum: &[Complex64], tol: f64) -> bool {
    spectrum
        .iter()
        .all(|l| (l - ONE).norm() <= tol || (l - I).norm() <= tol)
}
