//! Reference implementations used as independent oracles by the
//! integration tests. None of them calls into the library's numerics.
#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, x);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * x * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                out.push((x, 2.0 / ((1.0 - x * x) * dq * dq)));
                break;
            }
        }
    }
    out
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` panels.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in rule {
            total += w * 0.5 * h * f(mid + 0.5 * h * x);
        }
    }
    total
}

/// `n`-th derivative of an entire function at real `x` from Cauchy's
/// integral formula on a circle of radius `r`.
pub fn cauchy_derivative<F: Fn(Complex64) -> Complex64>(f: F, x: f64, n: u32, r: f64) -> f64 {
    let m = 128;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let theta = 2.0 * PI * j as f64 / m as f64;
        let e = Complex64::from_polar(1.0, theta);
        acc += f(x + r * e) * Complex64::from_polar(1.0, -(n as f64) * theta);
    }
    let fact: f64 = (1..=n).map(f64::from).product();
    (acc / m as f64).re * fact / r.powi(n as i32)
}

/// The perturbation, written out from its coefficients.
pub fn g_reference(s: f64) -> f64 {
    let a = s.abs();
    if !(1.0..=2.0).contains(&a) {
        return 0.0;
    }
    7280.0 / 69.0 * a.powi(3) - 11025.0 / 23.0 * a * a + 49000.0 / 69.0 * a - 7875.0 / 23.0
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `J` evaluated from its definition as a single integral in `x` of
/// `phi * g`, its fourth derivative and the `N(0, 2)` density.
pub fn j_from_definition() -> f64 {
    let inner = gauss_legendre(40);
    let outer = gauss_legendre(20);
    let conv = |x: f64, kernel: &dyn Fn(f64) -> f64| {
        gl_integrate(|s| g_reference(s) * kernel(x - s), -2.0, -1.0, 1, &inner)
            + gl_integrate(|s| g_reference(s) * kernel(x - s), 1.0, 2.0, 1, &inner)
    };
    let he4 = |y: f64| y.powi(4) - 6.0 * y * y + 3.0;
    gl_integrate(
        |x| {
            let u = conv(x, &phi);
            let u4 = conv(x, &|y| he4(y) * phi(y));
            let phi2 = (-x * x / 4.0).exp() / (4.0 * PI).sqrt();
            (u4 * u - he4(x / 2f64.sqrt()) * u * u / 8.0) / phi2
        },
        -14.0,
        14.0,
        56,
        &outer,
    )
}

/// Frozen value of [`j_from_definition`].
pub const J_ORACLE: f64 = 0.003_233_194_305_700_127_5;
