use std::f64::consts::PI;

use fracwiener::clifford::{euclidean_gamma_basis, pauli_basis};
use fracwiener::ncg::{
    build_y, gauss_legendre, sphere_volume_density, volume_quantization_check, volume_quantization_check_with,
    Kappa, Sector, SpherePatch,
};
use fracwiener::sde::wiener_rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn single_sphere_volume_is_four_pi() {
    let v = volume_quantization_check(1).unwrap();
    assert!((v - 4.0 * PI).abs() <= 1e-6, "{v}");
}

#[test]
fn volume_is_quantised_in_units_of_four_pi() {
    let v = volume_quantization_check(3).unwrap();
    assert!((v - 12.0 * PI).abs() <= 3e-6, "{v}");
    let patch = SpherePatch::new(32, 64).unwrap();
    for n in 1..=5 {
        let v = volume_quantization_check_with(&patch, n);
        assert!((v / (4.0 * PI) - n as f64).abs() < 1e-6);
    }
}

#[test]
fn both_sectors_double_the_density() {
    let patch = SpherePatch::new(16, 32).unwrap();
    let one = sphere_volume_density(&patch, Sector::Minus).integral();
    let two = sphere_volume_density(&patch, Sector::Both).integral();
    assert!((two - 2.0 * one).abs() < 1e-12);
}

#[test]
fn pointwise_density_converges_at_second_order_in_the_step() {
    let probes = [(0.3, 0.1), (1.2, 2.5), (2.7, 5.9)];
    let err = |h: f64| {
        let patch = SpherePatch::new(8, 8).unwrap().with_fd_step(h).unwrap();
        probes
            .iter()
            .map(|&(t, p)| (patch.density_at(t, p, Sector::Plus) - f64::sin(t)).abs())
            .fold(0.0, f64::max)
    };
    let errs = [err(0.2), err(0.1), err(0.05)];
    for pair in errs.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "{errs:?}");
    }
}

#[test]
fn gauss_legendre_rule_is_exact_for_high_degree() {
    let rule = gauss_legendre(12);
    for degree in 0..24 {
        let q: f64 = rule.iter().map(|(x, w)| w * x.powi(degree)).sum();
        let exact = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
        assert!((q - exact).abs() < 1e-14, "degree {degree}");
    }
}

#[test]
fn random_unit_coordinates_square_to_kappa() {
    let mut rng = wiener_rng(31);
    let pauli = pauli_basis();
    let gamma = euclidean_gamma_basis(3).unwrap();
    let mut worst: f64 = 0.0;
    for draw in 0..1000 {
        let (basis, dim) = if draw % 2 == 0 { (&pauli, 3) } else { (&gamma, 4) };
        let raw: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let unit: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let kappa = if draw % 4 < 2 { Kappa::Plus } else { Kappa::Minus };
        let y = build_y(&unit, basis, kappa).unwrap();
        assert!(y.is_unit);
        worst = worst.max(y.square_defect());
    }
    assert!(worst <= 1e-12, "{worst}");
}
