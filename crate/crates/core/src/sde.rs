//! Wiener paths, the α-power Euler–Maruyama process and the closed-form
//! square-root increments (scalar, Pauli-embedded, Dirac 3- and 4-process,
//! and the general quantized-manifold form).
//!
//! Increment formulas come in two flavours: a function returning the numeric
//! value and a `*_parts` function returning an [`ItoIncrement`] that keeps the
//! coefficients on `1`, `|dW_k|` and `dt` apart, so squares can be reduced with
//! the Itô table.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::clifford::{BasisKind, CMatrix, CliffordBasis, I, ONE, ZERO};
use crate::error::{invalid, Error, Result};
use crate::ito::ItoIncrement;

/// Real path sampled with uniform step; `values[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPath {
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Complex path sampled with uniform step; `values[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CPath {
    pub dt: f64,
    pub values: Vec<Complex64>,
}

impl RealPath {
    /// Path whose increments are exactly `increments`.
    pub fn from_increments(dt: f64, increments: &[f64]) -> Result<Self> {
        check_dt(dt)?;
        let mut values = Vec::with_capacity(increments.len() + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for d in increments {
            acc += d;
            values.push(acc);
        }
        Ok(Self { dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn increment(&self, i: usize) -> f64 {
        self.values[i] - self.values[i - 1]
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("non-empty path")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.dt)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl CPath {
    /// Running sums of `increments`, accumulated with compensation so the
    /// rounding error does not grow with the path length.
    pub fn from_increments(dt: f64, increments: impl IntoIterator<Item = Complex64>) -> Self {
        let mut values = vec![ZERO];
        let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
        for d in increments {
            re.add(d.re);
            im.add(d.im);
            values.push(Complex64::new(re.value(), im.value()));
        }
        Self { dt, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn increments(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn terminal(&self) -> Complex64 {
        *self.values.last().expect("non-empty path")
    }
}

/// Sign of a Wiener increment, with `sgn(0) = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// One sign per increment of a path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignSeq(pub Vec<Sign>);

impl SignSeq {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|s| s.value())
    }

    /// Pointwise square `B²`; always all ones.
    pub fn squared(&self) -> Vec<f64> {
        self.values().map(|s| s * s).collect()
    }
}

/// Potential entering the drift of the square-root process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    None,
    /// `U(x) = k x² / 2`.
    Harmonic { k: f64 },
    /// Samples of `U` on a uniform grid starting at `x_min`, linearly interpolated.
    Tabulated { x_min: f64, dx: f64, values: Vec<f64> },
}

impl Potential {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Potential::None => Ok(0.0),
            Potential::Harmonic { k } => Ok(0.5 * k * x * x),
            Potential::Tabulated { x_min, dx, values } => {
                let hi = x_min + dx * (values.len() as f64 - 1.0);
                if !(x >= *x_min && x <= hi) || values.len() < 2 {
                    return Err(Error::OutOfGrid { x, lo: *x_min, hi });
                }
                let s = (x - x_min) / dx;
                let i = (s.floor() as usize).min(values.len() - 2);
                let frac = s - i as f64;
                Ok(values[i] * (1.0 - frac) + values[i + 1] * frac)
            }
        }
    }
}

/// Parameters of a fractional-power simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracConfig {
    pub alpha: f64,
    pub mu0: f64,
    pub beta: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub potential: Potential,
}

impl Default for FracConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            mu0: 0.5,
            beta: 0.0,
            dt: 1e-4,
            n_steps: 10_000,
            seed: 20_150_617,
            potential: Potential::None,
        }
    }
}

impl FracConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be positive"));
        }
        if self.mu0 == 0.0 || !self.mu0.is_finite() {
            return Err(invalid("mu0", "must be nonzero"));
        }
        check_dt(self.dt)?;
        if self.n_steps == 0 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(invalid("dt", format!("must be positive, got {dt}")))
    }
}

fn check_mu(name: &'static str, mu: f64) -> Result<()> {
    if mu == 0.0 || !mu.is_finite() {
        Err(invalid(name, "must be nonzero"))
    } else {
        Ok(())
    }
}

/// SplitMix64 finaliser; maps `(master, index)` to well-separated seeds.
pub fn derive_path_seed(master_seed: u64, path_index: u64) -> u64 {
    let mut z = master_seed ^ path_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator used for all Wiener draws.
pub fn wiener_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard Wiener path with i.i.d. `N(0, dt)` increments.
pub fn generate_wiener(n_steps: usize, dt: f64, seed: u64) -> Result<RealPath> {
    if n_steps == 0 {
        return Err(invalid("n_steps", "must be at least 1"));
    }
    check_dt(dt)?;
    let mut rng = wiener_rng(seed);
    let scale = dt.sqrt();
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(0.0);
    let mut w = 0.0;
    for _ in 0..n_steps {
        let z: f64 = rng.sample(StandardNormal);
        w += scale * z;
        values.push(w);
    }
    Ok(RealPath { dt, values })
}

/// Principal branch `|x|^α e^{iα arg x}`, `arg x ∈ {0, π}` for real `x`.
///
/// Integer and half-integer exponents are evaluated without trigonometry so
/// that, e.g., `α = 1` returns `x` exactly and `α = 1/2` maps negative `x`
/// to `i √|x|`.
pub fn principal_power(x: f64, alpha: f64) -> Complex64 {
    if x >= 0.0 {
        return Complex64::new(x.powf(alpha), 0.0);
    }
    let mag = (-x).powf(alpha);
    let twice = 2.0 * alpha;
    if twice.fract() == 0.0 {
        // e^{iαπ} = i^{2α}
        return match (twice as i64).rem_euclid(4) {
            0 => Complex64::new(mag, 0.0),
            1 => Complex64::new(0.0, mag),
            2 => Complex64::new(-mag, 0.0),
            _ => Complex64::new(0.0, -mag),
        };
    }
    let (s, c) = (alpha * PI).sin_cos();
    Complex64::new(mag * c, mag * s)
}

/// `X_i = X_{i-1} + (W_i - W_{i-1})^α` on the principal branch.
pub fn fractional_power_path(w: &RealPath, alpha: f64) -> Result<CPath> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", "must be positive"));
    }
    if alpha == 1.0 {
        return Ok(CPath {
            dt: w.dt,
            values: w.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        });
    }
    Ok(CPath::from_increments(
        w.dt,
        w.increments().map(|d| principal_power(d, alpha)),
    ))
}

/// Squares the increments `(ΔW)^½` of the α = ½ process and re-accumulates
/// them. Returns the reconstruction and its largest deviation from `w`.
///
/// The increments are taken as generated rather than re-differenced from the
/// accumulated path, whose magnitude grows linearly with the step count.
pub fn square_path_check(w: &RealPath) -> (CPath, f64) {
    let y = CPath::from_increments(
        w.dt,
        w.increments().map(|d| {
            let r = principal_power(d, 0.5);
            r * r
        }),
    );
    let err = y
        .values
        .iter()
        .zip(&w.values)
        .map(|(y, w)| (y - w).norm())
        .fold(0.0, f64::max);
    (y, err)
}

pub fn sign_process(w: &RealPath) -> SignSeq {
    SignSeq(w.increments().map(Sign::of).collect())
}

/// Bernoulli phase `(1-i)/2·s + (1+i)/2`: `+1 ↦ 1`, `-1 ↦ i`.
pub fn phi_half(sign: Sign) -> Complex64 {
    match sign {
        Sign::Plus => ONE,
        Sign::Minus => I,
    }
}

/// Real coordinate of a complex sample used by the Wick-rotated comparisons:
/// `√2·Re(e^{iπ/4} z) = Re z − Im z`. It sends the phase `1` to `+1` and
/// the phase `i` to `−1`, so `Σ Φ(s)|a| ↦ Σ s|a|`.
pub fn wick_real(z: Complex64) -> f64 {
    z.re - z.im
}

/// Scalar square-root increment formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SqrtFormula {
    /// `(μ₀ + |dW|/(2μ₀) − dt/(8μ₀³))·Φ`, free scale μ₀.
    Tentative { mu0: f64 },
    /// `(½ + |dW| + (−1 + β·sgn dW)·dt)·Φ`, μ₀ fixed to ½.
    Drift { beta: f64 },
}

pub fn sqrt_increment_scalar_parts(dw: f64, dt: f64, formula: SqrtFormula) -> Result<ItoIncrement<Complex64>> {
    if !(dt >= 0.0) {
        return Err(invalid("dt", "must be non-negative"));
    }
    let sign = Sign::of(dw);
    let phi = phi_half(sign);
    let (c0, ca, cdt) = match formula {
        SqrtFormula::Tentative { mu0 } => {
            check_mu("mu0", mu0)?;
            (mu0, 1.0 / (2.0 * mu0), -1.0 / (8.0 * mu0 * mu0 * mu0))
        }
        SqrtFormula::Drift { beta } => (0.5, 1.0, -1.0 + beta * sign.value()),
    };
    Ok(ItoIncrement {
        constant: phi * c0,
        abs_coeffs: vec![phi * ca],
        dt_coeff: phi * cdt,
        abs_dw: vec![dw.abs()],
        dt,
    })
}

pub fn sqrt_increment_scalar(dw: f64, dt: f64, formula: SqrtFormula) -> Result<Complex64> {
    Ok(sqrt_increment_scalar_parts(dw, dt, formula)?.value())
}

fn require_kind(basis: &CliffordBasis, kind: BasisKind, name: &'static str) -> Result<()> {
    if basis.kind == kind {
        Ok(())
    } else {
        Err(Error::WrongBasis {
            expected: name,
            got: basis.kind.to_string(),
        })
    }
}

/// Pauli-embedded square root
/// `σ₁(μ₀ + |dW|/(2μ₀) − dt/(8μ₀³))Φ + iσ₂μ₀Φ`.
pub fn sqrt_increment_matrix_parts(dw: f64, dt: f64, mu0: f64, basis: &CliffordBasis) -> Result<ItoIncrement<CMatrix>> {
    require_kind(basis, BasisKind::Pauli, "Pauli")?;
    check_mu("mu0", mu0)?;
    let phi = phi_half(Sign::of(dw));
    let s1 = basis.generators[0].scale(phi);
    let is2 = basis.generators[1].scale(I * phi);
    Ok(ItoIncrement {
        constant: &s1.scale_real(mu0) + &is2.scale_real(mu0),
        abs_coeffs: vec![s1.scale_real(1.0 / (2.0 * mu0))],
        dt_coeff: s1.scale_real(-1.0 / (8.0 * mu0.powi(3))),
        abs_dw: vec![dw.abs()],
        dt,
    })
}

pub fn sqrt_increment_matrix(dw: f64, dt: f64, mu0: f64, basis: &CliffordBasis) -> Result<CMatrix> {
    Ok(sqrt_increment_matrix_parts(dw, dt, mu0, basis)?.value())
}

/// Shared shape of the multi-process increments:
/// `Σ_k first[k](μ_k + |dW_k|/(2μ_k) − dt/(8μ_k³))Φ_k + Σ_k second[k] μ_k Φ_k`.
fn clifford_sum_parts(first: &[CMatrix], second: &[CMatrix], dw: &[f64], dt: f64, mu: &[f64]) -> Result<ItoIncrement<CMatrix>> {
    let n = first[0].dim();
    let mut constant = CMatrix::zeros(n);
    let mut dt_coeff = CMatrix::zeros(n);
    let mut abs_coeffs = Vec::with_capacity(dw.len());
    for k in 0..dw.len() {
        check_mu("mu", mu[k])?;
        let phi = phi_half(Sign::of(dw[k]));
        let a = first[k].scale(phi);
        let b = second[k].scale(phi);
        constant = &(&constant + &a.scale_real(mu[k])) + &b.scale_real(mu[k]);
        abs_coeffs.push(a.scale_real(1.0 / (2.0 * mu[k])));
        dt_coeff = &dt_coeff + &a.scale_real(-1.0 / (8.0 * mu[k].powi(3)));
    }
    Ok(ItoIncrement {
        constant,
        abs_coeffs,
        dt_coeff,
        abs_dw: dw.iter().map(|d| d.abs()).collect(),
        dt,
    })
}

/// Three spatial processes:
/// `Σ_k iγ_k(μ_k + |dW_k|/(2μ_k) − dt/(8μ_k³))Φ_k + Σ_k iγ₀γ_k μ_k Φ_k`.
pub fn dirac3_increment_parts(dw: [f64; 3], dt: f64, mu: [f64; 3], basis: &CliffordBasis) -> Result<ItoIncrement<CMatrix>> {
    require_kind(basis, BasisKind::DiracMinkowski, "DiracMinkowski")?;
    let g = &basis.generators;
    let first: Vec<CMatrix> = (1..4).map(|k| g[k].scale(I)).collect();
    let second: Vec<CMatrix> = (1..4).map(|k| (&g[0] * &g[k]).scale(I)).collect();
    clifford_sum_parts(&first, &second, &dw, dt, &mu)
}

pub fn dirac3_increment(dw: [f64; 3], dt: f64, mu: [f64; 3], basis: &CliffordBasis) -> Result<CMatrix> {
    Ok(dirac3_increment_parts(dw, dt, mu, basis)?.value())
}

/// `γ^k = η^{kk} γ_k` with signature (+, −, −, −).
pub fn raised_gamma(basis: &CliffordBasis, k: usize) -> CMatrix {
    basis.generators[k].scale_real(basis.metric(k))
}

/// Four processes with the chirality matrix:
/// `Σ_k iγ^k(μ_k + |dW_k|/(2μ_k) − dt/(8μ_k³))Φ_k + Σ_k iγ⁵γ^k μ_k Φ_k`.
pub fn dirac4_increment_parts(dw: [f64; 4], dt: f64, mu: [f64; 4], basis: &CliffordBasis) -> Result<ItoIncrement<CMatrix>> {
    require_kind(basis, BasisKind::DiracMinkowski, "DiracMinkowski")?;
    let g5 = basis.chirality.as_ref().expect("Dirac basis carries γ⁵");
    let first: Vec<CMatrix> = (0..4).map(|k| raised_gamma(basis, k).scale(I)).collect();
    let second: Vec<CMatrix> = (0..4).map(|k| (g5 * &raised_gamma(basis, k)).scale(I)).collect();
    clifford_sum_parts(&first, &second, &dw, dt, &mu)
}

pub fn dirac4_increment(dw: [f64; 4], dt: f64, mu: [f64; 4], basis: &CliffordBasis) -> Result<CMatrix> {
    Ok(dirac4_increment_parts(dw, dt, mu, basis)?.value())
}

/// Coefficients (κ_A, ξ_A, ζ_A, η_A) of one generator in the general
/// quantized-manifold increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NcgCoefficients {
    pub kappa: Complex64,
    pub xi: Complex64,
    pub zeta: Complex64,
    pub eta: Complex64,
}

/// `dY = Σ_A Γ^A(κ_A + ξ_A dX_A B_A + ζ_A dt + iη_A γ⁵)Φ_A`, where the
/// Bernoulli sign `B_A` must equal the sign of `dX_A`.
pub fn ncg_increment(
    params: &[NcgCoefficients],
    dx: &[f64],
    signs: &SignSeq,
    dt: f64,
    basis: &CliffordBasis,
) -> Result<CMatrix> {
    let rank = basis.len();
    for len in [params.len(), dx.len(), signs.0.len()] {
        if len != rank {
            return Err(Error::DimensionMismatch { left: rank, right: len });
        }
    }
    for (a, (d, s)) in dx.iter().zip(&signs.0).enumerate() {
        if Sign::of(*d) != *s {
            return Err(Error::SignMismatch(a));
        }
    }
    let n = basis.dim();
    let id = CMatrix::identity(n);
    let needs_chirality = params.iter().any(|p| p.eta != ZERO);
    let chirality = match (&basis.chirality, needs_chirality) {
        (Some(g5), _) => g5.clone(),
        (None, false) => CMatrix::zeros(n),
        (None, true) => {
            return Err(Error::WrongBasis {
                expected: "basis with a chirality matrix",
                got: basis.kind.to_string(),
            })
        }
    };
    let mut out = CMatrix::zeros(n);
    for (a, p) in params.iter().enumerate() {
        let sign = signs.0[a];
        let scalar = p.kappa + p.xi * dx[a] * sign.value() + p.zeta * dt;
        let inner = &id.scale(scalar) + &chirality.scale(I * p.eta);
        let term = (&basis.generators[a] * &inner).scale(phi_half(sign));
        out = &out + &term;
    }
    Ok(out)
}

/// Square-root process with a potential in the drift:
/// `{½ + |dW| + (−1 + U(X)·sgn dW)·dt}·Φ`, with `U` evaluated at the
/// real coordinate [`wick_real`] of the running value.
pub fn sqrt_path_with_potential(cfg: &FracConfig, w: &RealPath) -> Result<CPath> {
    check_dt(w.dt)?;
    let mut values = Vec::with_capacity(w.len());
    values.push(ZERO);
    let mut x = ZERO;
    for dw in w.increments() {
        let sign = Sign::of(dw);
        let u = cfg.potential.eval(wick_real(x))?;
        let coeff = 0.5 + dw.abs() + (-1.0 + u * sign.value()) * w.dt;
        x += phi_half(sign) * coeff;
        values.push(x);
    }
    Ok(CPath { dt: w.dt, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{dirac_basis, pauli_basis};

    #[test]
    fn wiener_starts_at_zero_and_is_deterministic() {
        let a = generate_wiener(100, 0.01, 7).unwrap();
        let b = generate_wiener(100, 0.01, 7).unwrap();
        assert_eq!(a.values[0], 0.0);
        assert_eq!(a, b);
        assert_ne!(a, generate_wiener(100, 0.01, 8).unwrap());
        assert_eq!(a.len(), 101);
    }

    #[test]
    fn wiener_rejects_bad_inputs() {
        assert!(generate_wiener(0, 0.01, 1).is_err());
        assert!(generate_wiener(10, 0.0, 1).is_err());
        assert!(generate_wiener(10, -1.0, 1).is_err());
    }

    #[test]
    fn increment_variance() {
        let n = 1_000_000;
        let w = generate_wiener(n, 0.01, 99).unwrap();
        let mean = w.terminal() / n as f64;
        let var = w.increments().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var - 0.01).abs() / 0.01 < 0.01, "var = {var}");
    }

    #[test]
    fn alpha_one_is_identity() {
        let w = generate_wiener(500, 0.01, 3).unwrap();
        let x = fractional_power_path(&w, 1.0).unwrap();
        for (xv, wv) in x.values.iter().zip(&w.values) {
            assert_eq!(*xv, Complex64::new(*wv, 0.0));
        }
    }

    #[test]
    fn half_power_of_negative_increment() {
        let w = RealPath::from_increments(1.0, &[-0.04]).unwrap();
        let x = fractional_power_path(&w, 0.5).unwrap();
        let d = x.values[1] - x.values[0];
        assert!((d - Complex64::new(0.0, 0.2)).norm() < 1e-15);
        assert!(fractional_power_path(&w, 0.0).is_err());
    }

    #[test]
    fn general_alpha_uses_principal_branch() {
        let z = principal_power(-8.0, 1.0 / 3.0);
        let expected = Complex64::from_polar(2.0, PI / 3.0);
        assert!((z - expected).norm() < 1e-14);
        assert_eq!(principal_power(-3.0, 2.0), Complex64::new(9.0, 0.0));
    }

    #[test]
    fn square_check_small_cases() {
        let zero = RealPath::from_increments(0.1, &[0.0, 0.0, 0.0]).unwrap();
        let (y, err) = square_path_check(&zero);
        assert!(y.values.iter().all(|v| *v == ZERO));
        assert_eq!(err, 0.0);
        let one = RealPath::from_increments(0.1, &[0.09]).unwrap();
        let (y, err) = square_path_check(&one);
        assert!((y.values[1] - Complex64::new(0.09, 0.0)).norm() < 1e-16);
        assert!(err < 1e-16);
    }

    #[test]
    fn signs_and_phases() {
        let w = RealPath::from_increments(1.0, &[0.3, -0.1]).unwrap();
        assert_eq!(sign_process(&w).0, vec![Sign::Plus, Sign::Minus]);
        let z = RealPath::from_increments(1.0, &[0.0]).unwrap();
        assert_eq!(sign_process(&z).0, vec![Sign::Plus]);
        assert_eq!(sign_process(&w).squared(), vec![1.0, 1.0]);
        for s in [Sign::Plus, Sign::Minus] {
            let p = phi_half(s);
            assert_eq!(p * p, Complex64::new(s.value(), 0.0));
            assert_eq!(p.norm(), 1.0);
            let formula = Complex64::new(0.5, -0.5) * s.value() + Complex64::new(0.5, 0.5);
            assert_eq!(p, formula);
        }
    }

    #[test]
    fn drift_formula_substitution() {
        let v = sqrt_increment_scalar(0.09, 0.0, SqrtFormula::Drift { beta: 0.0 }).unwrap();
        assert!((v - Complex64::new(0.59, 0.0)).norm() < 1e-15);
        assert!(sqrt_increment_scalar(0.1, 0.0, SqrtFormula::Tentative { mu0: 0.0 }).is_err());
    }

    #[test]
    fn tentative_formula_ito_square() {
        for (dw, mu0) in [(0.3, 0.7), (-0.2, 1.3), (0.05, -0.4)] {
            let dt = 0.01;
            let sq = sqrt_increment_scalar_parts(dw, dt, SqrtFormula::Tentative { mu0 })
                .unwrap()
                .ito_square();
            let expected = mu0 * mu0 * Sign::of(dw).value() + dw;
            assert!((sq - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn pauli_ito_square_is_dw() {
        let basis = pauli_basis();
        let parts = sqrt_increment_matrix_parts(0.3, 0.0, 0.7, &basis).unwrap();
        let want = CMatrix::scalar(2, Complex64::new(0.3, 0.0));
        assert!(parts.ito_square().max_abs_diff(&want).unwrap() < 1e-12);
        // the raw product keeps sgn(dW)·dW²/(4μ₀²)
        let raw = parts.raw_square();
        let extra = 0.09 / (4.0 * 0.49);
        assert!((raw.get(0, 0).re - 0.3 - extra).abs() < 1e-12);
        let zero = sqrt_increment_matrix_parts(0.0, 0.0, 0.7, &basis).unwrap();
        assert!(zero.ito_square().max_abs() < 1e-15);
        assert!(zero.raw_square().max_abs() < 1e-15);
        assert!(sqrt_increment_matrix(0.1, 0.0, 0.5, &dirac_basis()).is_err());
    }

    #[test]
    fn potential_path_substitution() {
        let cfg = FracConfig {
            potential: Potential::Harmonic { k: 1.0 },
            dt: 0.001,
            ..FracConfig::default()
        };
        // Start from a state with real coordinate 2 by prepending a step.
        let u = cfg.potential.eval(2.0).unwrap();
        let coeff = 0.5 + 0.01 + (-1.0 + u) * 0.001;
        assert!((coeff - 0.511).abs() < 1e-15);
        let w = generate_wiener(200, 0.001, 5).unwrap();
        let plain = FracConfig {
            potential: Potential::None,
            ..cfg.clone()
        };
        let zero_k = FracConfig {
            potential: Potential::Harmonic { k: 0.0 },
            ..cfg.clone()
        };
        let a = sqrt_path_with_potential(&plain, &w).unwrap();
        let b = sqrt_path_with_potential(&zero_k, &w).unwrap();
        assert_eq!(a, b);
        let direct = CPath::from_increments(
            w.dt,
            w.increments()
                .map(|d| sqrt_increment_scalar(d, w.dt, SqrtFormula::Drift { beta: 0.0 }).unwrap()),
        );
        for (p, q) in a.values.iter().zip(&direct.values) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn tabulated_potential_bounds() {
        let p = Potential::Tabulated {
            x_min: 0.0,
            dx: 1.0,
            values: vec![0.0, 2.0, 4.0],
        };
        assert_eq!(p.eval(0.5).unwrap(), 1.0);
        assert_eq!(p.eval(2.0).unwrap(), 4.0);
        assert!(matches!(p.eval(2.5), Err(Error::OutOfGrid { .. })));
        let cfg = FracConfig {
            potential: p,
            ..FracConfig::default()
        };
        let w = RealPath::from_increments(0.01, &[0.1; 50]).unwrap();
        assert!(sqrt_path_with_potential(&cfg, &w).is_err());
    }

    #[test]
    fn dirac_zero_inputs() {
        let b = dirac_basis();
        let m3 = dirac3_increment_parts([0.0; 3], 0.0, [0.4, 0.5, 0.6], &b).unwrap();
        assert!(m3.raw_square().max_abs() < 1e-14);
        let m4 = dirac4_increment_parts([0.0; 4], 0.0, [0.4, 0.5, 0.6, 0.7], &b).unwrap();
        assert!(m4.raw_square().max_abs() < 1e-14);
        assert!(dirac3_increment([0.1; 3], 0.0, [0.0, 1.0, 1.0], &b).is_err());
        assert!(dirac3_increment([0.1; 3], 0.0, [1.0; 3], &pauli_basis()).is_err());
    }

    #[test]
    fn ncg_trivial_cases() {
        let b = dirac_basis();
        let zero = NcgCoefficients {
            kappa: ZERO,
            xi: ZERO,
            zeta: ZERO,
            eta: ZERO,
        };
        let dx = [0.1, -0.2, 0.3, 0.05];
        let signs = SignSeq(dx.iter().map(|d| Sign::of(*d)).collect());
        let m = ncg_increment(&[zero; 4], &dx, &signs, 0.01, &b).unwrap();
        assert_eq!(m.max_abs(), 0.0);

        let mut params = [zero; 4];
        params[2].kappa = ONE;
        let m = ncg_increment(&params, &dx, &signs, 0.01, &b).unwrap();
        assert!(m.max_abs_diff(&b.generators[2]).unwrap() < 1e-15);

        assert!(matches!(
            ncg_increment(&params[..3], &dx, &signs, 0.01, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        let flipped = SignSeq(vec![Sign::Minus, Sign::Minus, Sign::Plus, Sign::Plus]);
        assert_eq!(
            ncg_increment(&params, &dx, &flipped, 0.01, &b).unwrap_err(),
            Error::SignMismatch(0)
        );
    }
}
