//! Formal increment algebra under the Itô multiplication table.
//!
//! Increments are polynomials in three kinds of symbols: the signs `s_k` of
//! independent Wiener increments (`s_k² = 1`), their magnitudes `|dW_k|`,
//! and `dt`. Products reduce by
//!
//! ```text
//! |dW_j|·|dW_k| = δ_jk dt,   |dW_k|·dt = 0,   dt·dt = 0
//! ```
//!
//! which is the usual table `(dW)² = dt`, `dW·dt = 0`, `(dt)² = 0` written for
//! `dW_k = s_k |dW_k|`. Coefficients may be complex scalars or matrices, so
//! the same machinery squares both scalar and Clifford-embedded increments.
//!
//! [`ItoIncrement`] is the numeric counterpart: an increment whose signs are
//! already sampled, stored as its coefficients on `1`, `|dW_k|` and `dt`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::clifford::CMatrix;

/// Coefficient ring for increment polynomials. Multiplication need not commute.
pub trait Coeff: Clone {
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: Complex64) -> Self;
    /// Largest entrywise modulus.
    fn magnitude(&self) -> f64;
}

impl Coeff for Complex64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: Complex64) -> Self {
        self * c
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Coeff for CMatrix {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: Complex64) -> Self {
        CMatrix::scale(self, c)
    }
    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
}

/// Reduced monomial: a product of distinct signs times at most one of
/// `|dW_k|` or `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    /// Bit k set when `s_k` is a factor.
    pub signs: u32,
    pub factor: Factor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    One,
    AbsDw(u8),
    Dt,
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        signs: 0,
        factor: Factor::One,
    };

    pub fn sign(k: u8) -> Self {
        Self {
            signs: 1 << k,
            factor: Factor::One,
        }
    }

    /// `dW_k = s_k |dW_k|`.
    pub fn dw(k: u8) -> Self {
        Self {
            signs: 1 << k,
            factor: Factor::AbsDw(k),
        }
    }

    pub fn abs_dw(k: u8) -> Self {
        Self {
            signs: 0,
            factor: Factor::AbsDw(k),
        }
    }

    pub fn dt() -> Self {
        Self {
            signs: 0,
            factor: Factor::Dt,
        }
    }

    pub fn with_signs(mut self, signs: u32) -> Self {
        self.signs = signs;
        self
    }

    /// Product under the Itô table; `None` when it vanishes.
    pub fn mul(self, other: Self) -> Option<Self> {
        let factor = match (self.factor, other.factor) {
            (Factor::One, f) | (f, Factor::One) => f,
            (Factor::AbsDw(j), Factor::AbsDw(k)) if j == k => Factor::Dt,
            _ => return None,
        };
        Some(Self {
            signs: self.signs ^ other.signs,
            factor,
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for k in 0..32 {
            if self.signs & (1 << k) != 0 {
                parts.push(format!("s{k}"));
            }
        }
        match self.factor {
            Factor::One => {}
            Factor::AbsDw(k) => parts.push(format!("|dW{k}|")),
            Factor::Dt => parts.push("dt".into()),
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// Polynomial in reduced monomials with coefficients in `R`.
#[derive(Debug, Clone)]
pub struct ItoPoly<R: Coeff> {
    terms: BTreeMap<Monomial, R>,
}

impl<R: Coeff> Default for ItoPoly<R> {
    fn default() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }
}

impl<R: Coeff> ItoPoly<R> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(mono: Monomial, coeff: R) -> Self {
        let mut p = Self::zero();
        p.terms.insert(mono, coeff);
        p
    }

    pub fn constant(coeff: R) -> Self {
        Self::term(Monomial::ONE, coeff)
    }

    /// The Bernoulli phase `(1+i)/2 + (1-i)/2 s_k`, times `unit`.
    pub fn phi_half(k: u8, unit: &R) -> Self {
        let mut p = Self::constant(unit.scale(Complex64::new(0.5, 0.5)));
        p.terms
            .insert(Monomial::sign(k), unit.scale(Complex64::new(0.5, -0.5)));
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> Option<&R> {
        self.terms.get(mono)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.terms
                .entry(*m)
                .and_modify(|e| *e = e.add(c))
                .or_insert_with(|| c.clone());
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, r)| (*m, r.scale(c))).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(m) = ma.mul(*mb) {
                    let prod = ca.mul(cb);
                    out.terms
                        .entry(m)
                        .and_modify(|e| *e = e.add(&prod))
                        .or_insert(prod);
                }
            }
        }
        out
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Drop terms whose coefficient magnitude is at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.magnitude() > tol)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Numeric value for sampled signs (`signs[k] ∈ {±1}`), magnitudes and `dt`.
    pub fn evaluate(&self, signs: &[f64], abs_dw: &[f64], dt: f64, zero: R) -> R {
        self.terms.iter().fold(zero, |acc, (m, c)| {
            let mut w = 1.0;
            for (k, s) in signs.iter().enumerate() {
                if m.signs & (1 << k) != 0 {
                    w *= s;
                }
            }
            w *= match m.factor {
                Factor::One => 1.0,
                Factor::AbsDw(k) => abs_dw[k as usize],
                Factor::Dt => dt,
            };
            acc.add(&c.scale(Complex64::new(w, 0.0)))
        })
    }
}

impl<R: Coeff + fmt::Debug> fmt::Display for ItoPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({c:?})·{m}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// An increment with sampled signs, split as
/// `constant + Σ_k abs_coeffs[k]·|dW_k| + dt_coeff·dt`.
#[derive(Debug, Clone)]
pub struct ItoIncrement<R: Coeff> {
    pub constant: R,
    pub abs_coeffs: Vec<R>,
    pub dt_coeff: R,
    pub abs_dw: Vec<f64>,
    pub dt: f64,
}

impl<R: Coeff> ItoIncrement<R> {
    /// Numeric value of the increment.
    pub fn value(&self) -> R {
        let mut v = self.constant.add(&self.dt_coeff.scale(Complex64::new(self.dt, 0.0)));
        for (c, a) in self.abs_coeffs.iter().zip(&self.abs_dw) {
            v = v.add(&c.scale(Complex64::new(*a, 0.0)));
        }
        v
    }

    /// Square reduced by the Itô table, evaluated at the sampled magnitudes:
    /// `C₀² + Σ_k {C₀, C_k}|dW_k| + ({C₀, C_dt} + Σ_k C_k²) dt`.
    pub fn ito_square(&self) -> R {
        let anti = |a: &R, b: &R| a.mul(b).add(&b.mul(a));
        let mut out = self.constant.mul(&self.constant);
        let mut dt_part = anti(&self.constant, &self.dt_coeff);
        for (c, a) in self.abs_coeffs.iter().zip(&self.abs_dw) {
            out = out.add(&anti(&self.constant, c).scale(Complex64::new(*a, 0.0)));
            dt_part = dt_part.add(&c.mul(c));
        }
        out.add(&dt_part.scale(Complex64::new(self.dt, 0.0)))
    }

    /// Plain product of the numeric value with itself.
    pub fn raw_square(&self) -> R {
        let v = self.value();
        v.mul(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rules() {
        let a = Monomial::abs_dw(0);
        assert_eq!(a.mul(a), Some(Monomial::dt()));
        assert_eq!(a.mul(Monomial::abs_dw(1)), None);
        assert_eq!(a.mul(Monomial::dt()), None);
        assert_eq!(Monomial::dt().mul(Monomial::dt()), None);
        assert_eq!(Monomial::sign(2).mul(Monomial::sign(2)), Some(Monomial::ONE));
        // (dW)² = s²|dW|² = dt
        assert_eq!(Monomial::dw(0).mul(Monomial::dw(0)), Some(Monomial::dt()));
    }

    #[test]
    fn phi_half_squares_to_sign() {
        let one = Complex64::new(1.0, 0.0);
        let phi = ItoPoly::phi_half(0, &one);
        let sq = phi.square().pruned(1e-15);
        let terms: Vec<_> = sq.terms().collect();
        assert_eq!(terms.len(), 1);
        assert_eq!(*terms[0].0, Monomial::sign(0));
        assert!((terms[0].1 - one).norm() < 1e-15);
    }

    #[test]
    fn numeric_square_matches_symbolic() {
        let one = Complex64::new(1.0, 0.0);
        // x = 2 + 3|dW0| - dt with sign s0 = -1
        let inc = ItoIncrement {
            constant: Complex64::new(2.0, 0.0),
            abs_coeffs: vec![Complex64::new(3.0, 0.0)],
            dt_coeff: -one,
            abs_dw: vec![0.1],
            dt: 0.01,
        };
        // (2 + 3a - dt)² = 4 + 12a + (9 - 4)dt
        let expected = 4.0 + 12.0 * 0.1 + 5.0 * 0.01;
        assert!((inc.ito_square().re - expected).abs() < 1e-14);
        let v = 2.0 + 0.3 - 0.01;
        assert!((inc.raw_square().re - v * v).abs() < 1e-14);
    }
}
