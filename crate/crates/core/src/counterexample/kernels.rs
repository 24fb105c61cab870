use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SignedFunction;
use crate::error::{Error, Result};
use crate::numeric::{csum, simpson_weights};
use crate::quadrature::integrate;

/// Default tensor quadrature step for [`compute_j`].
pub const DEFAULT_J_STEP: f64 = 1e-3;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// `exp((-s^2 + 4 s t - t^2) / 6)`.
pub fn gaussian_factor(s: f64, t: f64) -> f64 {
    ((-s * s + 4.0 * s * t - t * t) / 6.0).exp()
}

/// Polynomial in the first kernel; also `81 d^4/ds^4` of the Gaussian factor
/// divided by that factor.
pub fn bracket_j1(s: f64, t: f64) -> f64 {
    let (s2, t2) = (s * s, t * t);
    27.0 + s2 * s2 - 8.0 * s2 * s * t - 72.0 * t2 + 16.0 * t2 * t2 - 8.0 * s * t * (-9.0 + 4.0 * t2)
        + 6.0 * s2 * (-3.0 + 4.0 * t2)
}

/// Polynomial in the second kernel.
pub fn bracket_j2(s: f64, t: f64) -> f64 {
    let u = (s + t) * (s + t);
    27.0 + u * (-18.0 + u)
}

/// Polynomial of the merged kernel, transcribed independently of the other
/// two; it equals `2 bracket_j1 - bracket_j2`.
pub fn bracket_merged(s: f64, t: f64) -> f64 {
    let (s2, t2) = (s * s, t * t);
    27.0 + s2 * s2 - 20.0 * s2 * s * t - 126.0 * t2 + 31.0 * t2 * t2 + 6.0 * s2 * (-3.0 + 7.0 * t2)
        + s * (180.0 * t - 68.0 * t2 * t)
}

/// Residuals of the two one-dimensional Gaussian kernel identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelResiduals {
    pub residual1: f64,
    pub residual2: f64,
}

/// Checks, by adaptive quadrature in `x`,
///
/// * `int 2 sqrt(pi) e^{x^2/4} (1/2pi) e^{-(x-s)^2/2} e^{-(x-t)^2/2} dx
///    = (2/sqrt 3) E(s, t)`;
/// * `int (sqrt(pi)/16)(12 - 12x^2 + x^4) e^{x^2/4} (1/2pi) e^{-(x-s)^2/2} e^{-(x-t)^2/2} dx
///    = E(s, t) bracket_j2(s, t) / (81 sqrt 3)`,
///
/// where `E` is [`gaussian_factor`].
pub fn kernel_identity_check(s: f64, t: f64) -> Result<KernelResiduals> {
    if s.abs() > 3.0 || t.abs() > 3.0 {
        return Err(Error::InvalidArgument(format!("(s, t) = ({s}, {t}) outside [-3, 3]^2")));
    }
    let pi = std::f64::consts::PI;
    // the combined exponent peaks at 2(s+t)/3 with variance 2/3
    let c = 2.0 * (s + t) / 3.0;
    let weight = move |x: f64| {
        (x * x / 4.0 - 0.5 * (x - s) * (x - s) - 0.5 * (x - t) * (x - t)).exp() / (2.0 * pi)
    };
    let (a, b) = (c - 14.0, c + 14.0);
    let lhs1 = integrate(|x| 2.0 * pi.sqrt() * weight(x), a, b, 1e-14, 1e-14, 400)?.value;
    let lhs2 = integrate(
        |x| pi.sqrt() / 16.0 * (12.0 - 12.0 * x * x + x.powi(4)) * weight(x),
        a,
        b,
        1e-14,
        1e-14,
        400,
    )?
    .value;
    let e = gaussian_factor(s, t);
    Ok(KernelResiduals {
        residual1: (lhs1 - 2.0 / SQRT_3 * e).abs(),
        residual2: (lhs2 - e * bracket_j2(s, t) / (81.0 * SQRT_3)).abs(),
    })
}

/// The double integrals `J_1`, `J_2` and `J = J_1 - J_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JResult {
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    /// From the merged kernel.
    #[serde(rename = "J_combined")]
    pub j_combined: f64,
    /// `|J(h) - J(2h)| / 15`, the Richardson estimate for Simpson's rule.
    pub quadrature_error_estimate: f64,
    pub step: f64,
}

struct Nodes {
    xs: Vec<f64>,
    gs: Vec<f64>,
    w: Vec<f64>,
    h: f64,
}

/// Simpson nodes on `[a, b]` with an interval count divisible by 4 so that
/// every other node gives the rule at twice the step.
fn nodes(g: &dyn SignedFunction, a: f64, b: f64, step: f64) -> Nodes {
    let mut m = ((b - a) / step).round().max(4.0) as usize;
    m = m.div_ceil(4) * 4;
    let h = (b - a) / m as f64;
    let xs: Vec<f64> = (0..=m).map(|i| if i == m { b } else { a + i as f64 * h }).collect();
    let gs = xs.iter().map(|&x| g.eval(x)).collect();
    Nodes { xs, gs, w: simpson_weights(m + 1), h }
}

fn coarsen(n: &Nodes) -> Nodes {
    let xs: Vec<f64> = n.xs.iter().step_by(2).cloned().collect();
    let gs: Vec<f64> = n.gs.iter().step_by(2).cloned().collect();
    let w = simpson_weights(xs.len());
    Nodes { xs, gs, w, h: 2.0 * n.h }
}

/// `(sum g g E B1, sum g g E B2, sum g g E Bm)` over one rectangle.
fn tile(p: &Nodes, q: &Nodes) -> [f64; 3] {
    let rows: Vec<[f64; 3]> = (0..p.xs.len())
        .into_par_iter()
        .map(|i| {
            let (s, gs) = (p.xs[i], p.gs[i]);
            if gs == 0.0 {
                return [0.0; 3];
            }
            let mut acc = [0.0; 3];
            for j in 0..q.xs.len() {
                let t = q.xs[j];
                let wgt = q.w[j] * q.gs[j] * gaussian_factor(s, t);
                if wgt == 0.0 {
                    continue;
                }
                acc[0] += wgt * bracket_j1(s, t);
                acc[1] += wgt * bracket_j2(s, t);
                acc[2] += wgt * bracket_merged(s, t);
            }
            let f = p.w[i] * gs * p.h * q.h;
            [acc[0] * f, acc[1] * f, acc[2] * f]
        })
        .collect();
    [0, 1, 2].map(|k| csum(rows.iter().map(|r| r[k])))
}

fn integrals(pieces: &[Nodes]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for p in pieces {
        for q in pieces {
            let t = tile(p, q);
            for k in 0..3 {
                out[k] += t[k];
            }
        }
    }
    let c = 1.0 / (81.0 * SQRT_3);
    [2.0 * c * out[0], c * out[1], c * out[2]]
}

/// Evaluates `J_1 = (2 / 81 sqrt 3) int int g(s) g(t) E B_1`,
/// `J_2 = (1 / 81 sqrt 3) int int g g E B_2` and the merged-kernel `J` by
/// tensor Simpson quadrature on each product of support pieces.
///
/// Fails with [`Error::KernelInconsistency`] if `J_1 - J_2` and the merged
/// value disagree by more than ten error estimates (plus round-off).
pub fn compute_j(g: &dyn SignedFunction, step: f64) -> Result<JResult> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidArgument(format!("quadrature step must be in (0, 0.1], got {step}")));
    }
    let pieces = g.pieces();
    if pieces.iter().any(|&(a, b)| a < -3.0 || b > 3.0 || a >= b) {
        return Err(Error::InvalidArgument("support must be a union of intervals in [-3, 3]".into()));
    }
    let fine: Vec<Nodes> = pieces.iter().map(|&(a, b)| nodes(g, a, b, step)).collect();
    let coarse: Vec<Nodes> = fine.iter().map(coarsen).collect();
    let [j1, j2, jc] = integrals(&fine);
    let [_, _, jc_coarse] = integrals(&coarse);
    let err = (jc - jc_coarse).abs() / 15.0;
    let scale = j1.abs() + j2.abs() + jc.abs();
    let diff = (j1 - j2 - jc).abs();
    if diff > 10.0 * err + 1e3 * f64::EPSILON * scale {
        return Err(Error::KernelInconsistency { j1_minus_j2: j1 - j2, combined: jc });
    }
    Ok(JResult { j1, j2, j_combined: jc, quadrature_error_estimate: err, step })
}
