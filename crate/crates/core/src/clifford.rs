//! Dense complex matrices and the three Clifford bases used throughout the
//! crate: Pauli, Dirac (Minkowski signature, Dirac representation) and the
//! Euclidean Γ algebras for two- and three-dimensional spheres.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, ONE)
    }

    /// `c` times the identity.
    pub fn scalar(dim: usize, c: Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = c;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch { left: 0, right: 0 });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { dim, entries })
    }

    /// Build from real-part / imaginary-part pairs, row-major.
    fn from_pairs(dim: usize, pairs: &[(f64, f64)]) -> Self {
        debug_assert_eq!(pairs.len(), dim * dim);
        Self {
            dim,
            entries: pairs.iter().map(|&(r, i)| Complex64::new(r, i)).collect(),
        }
    }

    /// Block matrix `[[a, b], [c, d]]` from four equally sized blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        for other in [b, c, d] {
            a.check_dim(other)?;
        }
        let n = a.dim;
        let mut m = Self::zeros(2 * n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, a.get(i, j));
                m.set(i, j + n, b.get(i, j));
                m.set(i + n, j, c.get(i, j));
                m.set(i + n, j + n, d.get(i, j));
            }
        }
        Ok(m)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim * other.dim;
        let mut m = Self::zeros(n);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        m.set(i * other.dim + k, j * other.dim + l, a * other.get(k, l));
                    }
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(Self { dim: n, entries: out })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(j, i, self.get(i, j).conj());
            }
        }
        m
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Coefficient of the identity in the trace-orthogonal decomposition, `tr(M)/n`.
    pub fn identity_component(&self) -> Complex64 {
        self.trace() / self.dim as f64
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.checked_sub(other)?.max_abs())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, m[(i, j)]);
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .to_nalgebra()
            .try_inverse()
            .ok_or(Error::SingularMatrix)?;
        Self::from_nalgebra(&inv)
    }

    /// Eigenvalues via a complex Schur decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let schur = nalgebra::linalg::Schur::try_new(self.to_nalgebra(), 1e-15, 10_000)
            .ok_or(Error::EigenFailure)?;
        let (_, t) = schur.unpack();
        Ok((0..self.dim).map(|i| t[(i, i)]).collect())
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// Operator forms panic on a dimension mismatch; use the `checked_*` methods
// where mismatches are a recoverable condition.
impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.checked_add(rhs).expect("CMatrix add")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.checked_sub(rhs).expect("CMatrix sub")
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.checked_mul(rhs).expect("CMatrix mul")
    }
}

impl Mul<Complex64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: Complex64) -> CMatrix {
        self.scale(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

/// `ab + ba`.
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.checked_mul(b)?.checked_add(&b.checked_mul(a)?)
}

/// `ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.checked_mul(b)?.checked_sub(&b.checked_mul(a)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    Pauli,
    DiracMinkowski,
    EuclideanGamma(usize),
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisKind::Pauli => write!(f, "Pauli"),
            BasisKind::DiracMinkowski => write!(f, "DiracMinkowski"),
            BasisKind::EuclideanGamma(d) => write!(f, "EuclideanGamma({d})"),
        }
    }
}

/// A fixed set of Clifford generators.
///
/// `conjugation_signs[a]` records κ_a in `conj(Γ_a) = κ_a Γ_a` for the
/// constructed representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordBasis {
    pub kind: BasisKind,
    pub generators: Vec<CMatrix>,
    pub chirality: Option<CMatrix>,
    pub conjugation_signs: Vec<i8>,
}

impl CliffordBasis {
    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Diagonal metric entry g_aa of the defining relation `{Γ_a, Γ_b} = 2 g_ab I`.
    pub fn metric(&self, a: usize) -> f64 {
        match self.kind {
            BasisKind::DiracMinkowski if a > 0 => -1.0,
            _ => 1.0,
        }
    }

    /// Largest entrywise deviation from `{Γ_a, Γ_b} = 2 g_ab I` over all pairs.
    pub fn anticommutation_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for (a, ga) in self.generators.iter().enumerate() {
            for (b, gb) in self.generators.iter().enumerate() {
                let expected = if a == b {
                    CMatrix::scalar(n, Complex64::new(2.0 * self.metric(a), 0.0))
                } else {
                    CMatrix::zeros(n)
                };
                let ac = anticommutator(ga, gb).expect("same-dimension generators");
                worst = worst.max(ac.max_abs_diff(&expected).expect("same dimension"));
            }
        }
        worst
    }

    /// Largest entrywise deviation from `M M† = I` over generators and chirality.
    pub fn unitarity_defect(&self) -> f64 {
        let id = CMatrix::identity(self.dim());
        self.generators
            .iter()
            .chain(self.chirality.iter())
            .map(|g| (g * &g.adjoint()).max_abs_diff(&id).expect("same dimension"))
            .fold(0.0, f64::max)
    }
}

fn c(re: f64, im: f64) -> (f64, f64) {
    (re, im)
}

pub fn sigma1() -> CMatrix {
    CMatrix::from_pairs(2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sigma2() -> CMatrix {
    CMatrix::from_pairs(2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sigma3() -> CMatrix {
    CMatrix::from_pairs(2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

fn conjugation_sign(m: &CMatrix) -> i8 {
    if m.conj().max_abs_diff(m).unwrap_or(f64::INFINITY) == 0.0 {
        1
    } else if m.conj().max_abs_diff(&-m).unwrap_or(f64::INFINITY) == 0.0 {
        -1
    } else {
        0
    }
}

/// Standard Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli_basis() -> CliffordBasis {
    let generators = vec![sigma1(), sigma2(), sigma3()];
    let conjugation_signs = generators.iter().map(conjugation_sign).collect();
    CliffordBasis {
        kind: BasisKind::Pauli,
        generators,
        chirality: None,
        conjugation_signs,
    }
}

/// γ₀…γ₃ in the Dirac representation, with γ⁵ = [[0, I], [I, 0]].
pub fn dirac_basis() -> CliffordBasis {
    let id = CMatrix::identity(2);
    let zero = CMatrix::zeros(2);
    let neg_id = -&id;
    let gamma0 = CMatrix::from_blocks(&id, &zero, &zero, &neg_id).expect("2x2 blocks");
    let mut generators = vec![gamma0];
    for s in [sigma1(), sigma2(), sigma3()] {
        let g = CMatrix::from_blocks(&zero, &s, &-&s, &zero).expect("2x2 blocks");
        generators.push(g);
    }
    let gamma5 = CMatrix::from_blocks(&zero, &id, &id, &zero).expect("2x2 blocks");
    let conjugation_signs = generators.iter().map(conjugation_sign).collect();
    CliffordBasis {
        kind: BasisKind::DiracMinkowski,
        generators,
        chirality: Some(gamma5),
        conjugation_signs,
    }
}

/// γ⁵ as the product `i γ₀ γ₁ γ₂ γ₃` of the Dirac generators.
pub fn chirality_from_product(basis: &CliffordBasis) -> Result<CMatrix> {
    if basis.kind != BasisKind::DiracMinkowski {
        return Err(Error::WrongBasis {
            expected: "DiracMinkowski",
            got: basis.kind.to_string(),
        });
    }
    let g = &basis.generators;
    Ok((&(&(&g[0] * &g[1]) * &g[2]) * &g[3]).scale(I))
}

/// Euclidean Γ¹…Γ^{d+1} with `{Γ^A, Γ^B} = 2δ^{AB}`.
///
/// d = 2 uses the Pauli triple. d = 3 uses `σ₁⊗σ_k` (k = 1, 2, 3) and
/// `σ₃⊗I`; its chirality is the product Γ¹Γ²Γ³Γ⁴, which squares to +I.
pub fn euclidean_gamma_basis(d: usize) -> Result<CliffordBasis> {
    let generators = match d {
        2 => vec![sigma1(), sigma2(), sigma3()],
        3 => {
            let mut g: Vec<CMatrix> = [sigma1(), sigma2(), sigma3()]
                .iter()
                .map(|s| sigma1().kron(s))
                .collect();
            g.push(sigma3().kron(&CMatrix::identity(2)));
            g
        }
        other => return Err(Error::UnsupportedDimension(other)),
    };
    let chirality = (d == 3).then(|| {
        generators
            .iter()
            .skip(1)
            .fold(generators[0].clone(), |acc, g| &acc * g)
    });
    let conjugation_signs = generators.iter().map(conjugation_sign).collect();
    Ok(CliffordBasis {
        kind: BasisKind::EuclideanGamma(d),
        generators,
        chirality,
        conjugation_signs,
    })
}
