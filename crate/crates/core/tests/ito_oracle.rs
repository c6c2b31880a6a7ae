//! Symbolic squares of the increment formulas, rebuilt here from the
//! polynomial primitives and compared term by term, then used as a second
//! route against the numeric coefficient squares of the library.

use fracwiener::clifford::{dirac_basis, pauli_basis, CMatrix};
use fracwiener::ito::{ItoPoly, Monomial};
use fracwiener::sde::{
    dirac3_increment_parts, dirac4_increment_parts, raised_gamma, sqrt_increment_matrix_parts,
    sqrt_increment_scalar_parts, SqrtFormula,
};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(c0 + ca·|dW_k| + cdt·dt)` with coefficients in `unit`'s ring.
fn linear<R: fracwiener::ito::Coeff>(k: u8, unit: &R, c0: Complex64, ca: Complex64, cdt: Complex64) -> ItoPoly<R> {
    ItoPoly::constant(unit.scale(c0))
        .add(&ItoPoly::term(Monomial::abs_dw(k), unit.scale(ca)))
        .add(&ItoPoly::term(Monomial::dt(), unit.scale(cdt)))
}

fn scalar_terms(p: &ItoPoly<Complex64>) -> Vec<(Monomial, Complex64)> {
    p.pruned(1e-14).terms().map(|(m, c)| (*m, *c)).collect()
}

fn assert_terms(p: &ItoPoly<Complex64>, expected: &[(Monomial, Complex64)]) {
    let got = scalar_terms(p);
    assert_eq!(got.len(), expected.len(), "terms: {p}");
    for (m, c) in expected {
        let found = p.coeff(m).copied().unwrap_or_default();
        assert!((found - c).norm() < 1e-13, "coefficient of {m}: {found} vs {c}");
    }
}

fn tentative(mu0: f64) -> ItoPoly<Complex64> {
    let one = re(1.0);
    linear(0, &one, re(mu0), re(1.0 / (2.0 * mu0)), re(-1.0 / (8.0 * mu0.powi(3)))).mul(&ItoPoly::phi_half(0, &one))
}

fn drift_form(beta: f64) -> ItoPoly<Complex64> {
    let one = re(1.0);
    linear(0, &one, re(0.5), re(1.0), re(-1.0))
        .add(&ItoPoly::term(Monomial::dt().with_signs(1), re(beta)))
        .mul(&ItoPoly::phi_half(0, &one))
}

#[test]
fn tentative_square_is_mu0_squared_sign_plus_dw() {
    for mu0 in [0.5, 1.0, 0.3, -2.0] {
        let sq = tentative(mu0).square();
        assert_terms(&sq, &[(Monomial::sign(0), re(mu0 * mu0)), (Monomial::dw(0), re(1.0))]);
    }
}

#[test]
fn drift_form_square_is_dw_plus_beta_dt_plus_quarter_sign() {
    for beta in [0.0, 1.0, -0.7] {
        let sq = drift_form(beta).square();
        let mut expected = vec![(Monomial::dw(0), re(1.0)), (Monomial::sign(0), re(0.25))];
        if beta != 0.0 {
            expected.push((Monomial::dt(), re(beta)));
        }
        assert_terms(&sq, &expected);
    }
}

fn pauli_sqrt(mu0: f64) -> ItoPoly<CMatrix> {
    let basis = pauli_basis();
    let id = CMatrix::identity(2);
    let s1 = &basis.generators[0];
    let is2 = basis.generators[1].scale(I);
    linear(0, s1, re(mu0), re(1.0 / (2.0 * mu0)), re(-1.0 / (8.0 * mu0.powi(3))))
        .add(&ItoPoly::constant(is2.scale_real(mu0)))
        .mul(&ItoPoly::phi_half(0, &id))
}

#[test]
fn pauli_square_is_dw_identity() {
    for mu0 in [0.5, 1.7, -0.4] {
        let sq = pauli_sqrt(mu0).square().pruned(1e-13);
        let terms: Vec<_> = sq.terms().collect();
        assert_eq!(terms.len(), 1, "{sq}");
        assert_eq!(*terms[0].0, Monomial::dw(0));
        assert!(terms[0].1.max_abs_diff(&CMatrix::identity(2)).unwrap() < 1e-13);
    }
}

/// `Σ_k first[k](μ_k + |dW_k|/2μ_k − dt/8μ_k³)Φ_k + Σ_k second[k]μ_kΦ_k`.
fn clifford_sum(first: &[CMatrix], second: &[CMatrix], mu: &[f64]) -> ItoPoly<CMatrix> {
    let id = CMatrix::identity(4);
    let mut total = ItoPoly::zero();
    for k in 0..mu.len() {
        let m = mu[k];
        let phi = ItoPoly::phi_half(k as u8, &id);
        let a = linear(k as u8, &first[k], re(m), re(1.0 / (2.0 * m)), re(-1.0 / (8.0 * m.powi(3))));
        let b = ItoPoly::constant(second[k].scale_real(m));
        total = total.add(&a.add(&b).mul(&phi));
    }
    total
}

fn dirac3_symbolic(mu: [f64; 3]) -> ItoPoly<CMatrix> {
    let g = dirac_basis().generators;
    let first: Vec<CMatrix> = (1..4).map(|k| g[k].scale(I)).collect();
    let second: Vec<CMatrix> = (1..4).map(|k| (&g[0] * &g[k]).scale(I)).collect();
    clifford_sum(&first, &second, &mu)
}

fn dirac4_symbolic(mu: [f64; 4]) -> ItoPoly<CMatrix> {
    let basis = dirac_basis();
    let g5 = basis.chirality.clone().unwrap();
    let first: Vec<CMatrix> = (0..4).map(|k| raised_gamma(&basis, k).scale(I)).collect();
    let second: Vec<CMatrix> = (0..4).map(|k| (&g5 * &raised_gamma(&basis, k)).scale(I)).collect();
    clifford_sum(&first, &second, &mu)
}

/// Identity components of the `dW_k` coefficients.
fn dw_identity_parts(sq: &ItoPoly<CMatrix>, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| sq.coeff(&Monomial::dw(k as u8)).map_or(Complex64::default(), CMatrix::identity_component))
        .collect()
}

/// Largest entry of the ensemble mean of the square at equal `E|dW_k|`:
/// the sign-free constant, the `dt` coefficient and `Σ_k coeff(|dW_k|)`.
fn sign_free_mean(sq: &ItoPoly<CMatrix>, n: usize) -> f64 {
    let get = |m: Monomial| sq.coeff(&m).cloned().unwrap_or_else(|| CMatrix::zeros(4));
    let abs_sum = (0..n).fold(CMatrix::zeros(4), |acc, k| &acc + &get(Monomial::abs_dw(k as u8)));
    [get(Monomial::ONE), get(Monomial::dt()), abs_sum]
        .iter()
        .map(CMatrix::max_abs)
        .fold(0.0, f64::max)
}

/// Residual coefficient with the `dW_k` identity parts removed.
fn residual_terms(sq: &ItoPoly<CMatrix>, n: usize) -> Vec<(Monomial, CMatrix)> {
    sq.terms()
        .map(|(m, c)| {
            let c = if (0..n).any(|k| *m == Monomial::dw(k as u8)) {
                c - &CMatrix::scalar(4, c.identity_component())
            } else {
                c.clone()
            };
            (*m, c)
        })
        .collect()
}

/// Distance of `m` from the span of the orthogonal unitary family `span`.
fn distance_from_span(m: &CMatrix, span: &[CMatrix]) -> f64 {
    let mut rest = m.clone();
    for b in span {
        let coeff = (&b.adjoint() * m).trace() / b.dim() as f64;
        rest = &rest - &b.scale(coeff);
    }
    rest.max_abs()
}

#[test]
fn dirac3_square_identity_component_is_sum_of_increments() {
    let sq = dirac3_symbolic([0.5; 3]).square().pruned(1e-13);
    for id in dw_identity_parts(&sq, 3) {
        assert!((id - 1.0).norm() < 1e-13);
    }
    assert!(sign_free_mean(&sq, 3) < 1e-13, "{sq}");
}

#[test]
fn dirac3_residual_lies_in_gamma0_gamma_j_gamma_k() {
    let g = dirac_basis().generators;
    let span: Vec<CMatrix> = [(1, 2), (1, 3), (2, 3)]
        .iter()
        .map(|&(j, k)| &(&g[0] * &g[j]) * &g[k])
        .collect();
    let sq = dirac3_symbolic([0.5, 0.8, 1.1]).square().pruned(1e-13);
    for (m, c) in residual_terms(&sq, 3) {
        assert!(c.identity_component().norm() < 1e-13, "{m}");
        assert!(distance_from_span(&c, &span) < 1e-13, "{m}");
    }
}

#[test]
fn dirac3_unequal_scales_leave_a_mean() {
    let sq = dirac3_symbolic([0.5, 0.8, 1.1]).square().pruned(1e-13);
    assert!(sign_free_mean(&sq, 3) > 1e-3);
}

#[test]
fn dirac4_identity_components_follow_the_metric() {
    let sq = dirac4_symbolic([0.5; 4]).square().pruned(1e-13);
    let basis = dirac_basis();
    for (k, id) in dw_identity_parts(&sq, 4).into_iter().enumerate() {
        assert!((id + basis.metric(k)).norm() < 1e-13, "k = {k}: {id}");
    }
    assert!(sign_free_mean(&sq, 4) < 1e-13);
    for (m, c) in residual_terms(&sq, 4) {
        assert!(c.identity_component().norm() < 1e-13, "{m}");
    }
}

fn signs_of(dw: &[f64]) -> Vec<f64> {
    dw.iter().map(|d| if *d >= 0.0 { 1.0 } else { -1.0 }).collect()
}

#[test]
fn numeric_squares_agree_with_symbolic_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let zero4 = CMatrix::zeros(4);
    for _ in 0..200 {
        let dt = rng.random_range(1e-5..1e-2);
        let d3: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.3..0.3));
        let d4: [f64; 4] = std::array::from_fn(|_| rng.random_range(-0.3..0.3));
        let mu3: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.2..1.5));
        let mu4: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.2..1.5));
        let abs3: Vec<f64> = d3.iter().map(|d| d.abs()).collect();
        let abs4: Vec<f64> = d4.iter().map(|d| d.abs()).collect();

        let sym = dirac3_symbolic(mu3).square().evaluate(&signs_of(&d3), &abs3, dt, zero4.clone());
        let num = dirac3_increment_parts(d3, dt, mu3, &dirac_basis()).unwrap().ito_square();
        assert!(sym.max_abs_diff(&num).unwrap() < 1e-11);

        let sym = dirac4_symbolic(mu4).square().evaluate(&signs_of(&d4), &abs4, dt, zero4.clone());
        let num = dirac4_increment_parts(d4, dt, mu4, &dirac_basis()).unwrap().ito_square();
        assert!(sym.max_abs_diff(&num).unwrap() < 1e-11);

        let mu0 = mu3[0];
        let dw = d3[0];
        let sym = pauli_sqrt(mu0).square().evaluate(&signs_of(&[dw]), &[dw.abs()], dt, CMatrix::zeros(2));
        let num = sqrt_increment_matrix_parts(dw, dt, mu0, &pauli_basis()).unwrap().ito_square();
        assert!(sym.max_abs_diff(&num).unwrap() < 1e-12);

        let sym = tentative(mu0).square().evaluate(&signs_of(&[dw]), &[dw.abs()], dt, re(0.0));
        let num = sqrt_increment_scalar_parts(dw, dt, SqrtFormula::Tentative { mu0 }).unwrap().ito_square();
        assert!((sym - num).norm() < 1e-12);

        let sym = drift_form(mu4[1]).square().evaluate(&signs_of(&[dw]), &[dw.abs()], dt, re(0.0));
        let num = sqrt_increment_scalar_parts(dw, dt, SqrtFormula::Drift { beta: mu4[1] })
            .unwrap()
            .ito_square();
        assert!((sym - num).norm() < 1e-12);
    }
}

#[test]
fn raw_square_differs_from_reduced_square() {
    // Without the table the product keeps dW²/(4μ₀²) beside dW.
    let parts = sqrt_increment_matrix_parts(0.2, 0.0, 0.5, &pauli_basis()).unwrap();
    let defect = parts.raw_square().max_abs_diff(&parts.ito_square()).unwrap();
    assert!((defect - 0.04 / (4.0 * 0.25)).abs() < 1e-14);
}

