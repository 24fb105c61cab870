//! Adaptive Gauss-Kronrod (7/15) integration on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` until the estimated absolute error is below
/// `max(abs_tol, rel_tol |I|)`. Fails if `max_intervals` is exhausted.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    // (a, b, value, error)
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let value: f64 = intervals.iter().map(|t| t.2).sum();
        let error: f64 = intervals.iter().map(|t| t.3).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral { value, error, evaluations });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {error:.3e} after {max_intervals} subintervals"
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(10) - 3.0 * x, -1.0, 2.0, 1e-13, 1e-13, 50).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 1.5 * (4.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-11);
    }

    #[test]
    fn gaussian_mass() {
        let r = integrate(|x| (-0.5 * x * x).exp(), -12.0, 12.0, 1e-14, 1e-14, 200).unwrap();
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x: f64| x.sqrt().ln(), 0.0, 1.0, 1e-10, 0.0, 500).unwrap();
        assert!((r.value + 0.5).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, 1e-15, 0.0, 4);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
