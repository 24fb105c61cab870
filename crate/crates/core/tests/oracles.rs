mod common;

use approx::assert_relative_eq;
use common::*;
use epi_lab_core::counterexample::{
    bracket_j1, bracket_j2, compute_j, g_eval, g_moments_exact, gaussian_factor, PerturbationG, DEFAULT_J_STEP,
};
use epi_lab_core::edgeworth::{hermite, std_normal_pdf};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

#[test]
fn gauss_legendre_is_exact_for_polynomials() {
    let rule = gauss_legendre(10);
    let v = gl_integrate(|x| x.powi(18) + x.powi(3), -1.0, 1.0, 1, &rule);
    assert_relative_eq!(v, 2.0 / 19.0, max_relative = 1e-14);
}

#[test]
fn oracle_matches_frozen_value() {
    let j = j_from_definition();
    assert!((j - J_ORACLE).abs() < 1e-13, "{j}");
    assert!(j > 0.003);
}

#[test]
fn compute_j_agrees_with_definition() {
    let r = compute_j(&PerturbationG::explicit(), DEFAULT_J_STEP).unwrap();
    assert!((r.j_combined - J_ORACLE).abs() < 1e-9, "{} vs {J_ORACLE}", r.j_combined);
    assert!((r.j1 - r.j2 - J_ORACLE).abs() < 1e-9);
}

#[test]
fn library_g_matches_reference() {
    for i in -250..=250 {
        let s = i as f64 * 0.01;
        assert!((g_eval(s) - g_reference(s)).abs() < 1e-12, "s = {s}");
    }
}

#[test]
fn moments_vanish_exactly() {
    let (m0, m2, m4) = g_moments_exact();
    assert!(m0.is_zero() && m2.is_zero() && m4.is_zero());
    let g = PerturbationG::explicit();
    assert_eq!(g.moment_exact(6), BigRational::from_integer(BigInt::from(2)));
    assert_eq!(g.moment_exact(8), BigRational::new(BigInt::from(4900), BigInt::from(253)));
}

#[test]
fn first_bracket_is_fourth_derivative_of_gaussian_factor() {
    for &(s, t) in &[(0.3, -1.2), (1.7, 1.1), (-2.4, 0.6), (0.0, 2.9)] {
        let f = |z: Complex64| ((-z * z + 4.0 * z * t - t * t) / 6.0).exp();
        let d4 = cauchy_derivative(f, s, 4, 1.0);
        assert_relative_eq!(81.0 * d4 / gaussian_factor(s, t), bracket_j1(s, t), max_relative = 1e-10, epsilon = 1e-10);
    }
}

#[test]
fn second_bracket_from_gaussian_integral() {
    // 1/(81 sqrt 3) bracket_j2 E(s,t) = int sqrt(pi)/16 (12 - 12x^2 + x^4) e^{x^2/4} phi(x-s) phi(x-t) dx
    let rule = gauss_legendre(30);
    for &(s, t) in &[(0.0, 0.0), (1.5, -0.5), (-2.0, -1.0)] {
        let c = 2.0 * (s + t) / 3.0;
        let rhs = gl_integrate(
            |x| {
                std::f64::consts::PI.sqrt() / 16.0
                    * (12.0 - 12.0 * x * x + x.powi(4))
                    * (x * x / 4.0).exp()
                    * std_normal_pdf(x - s)
                    * std_normal_pdf(x - t)
            },
            c - 14.0,
            c + 14.0,
            28,
            &rule,
        );
        let lhs = bracket_j2(s, t) * gaussian_factor(s, t) / (81.0 * 3f64.sqrt());
        assert_relative_eq!(lhs, rhs, max_relative = 1e-11);
    }
}

#[test]
fn hermite_matches_derivatives_of_phi() {
    let phi = |z: Complex64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for n in 0..=10u32 {
        for &x in &[-2.2, -0.4, 0.0, 0.9, 3.1] {
            let d = cauchy_derivative(phi, x, n, 2.0);
            let expected = if n % 2 == 0 { d } else { -d };
            assert!(
                (hermite(n as usize, x) * std_normal_pdf(x) - expected).abs() < 1e-11,
                "n = {n}, x = {x}"
            );
        }
    }
}
