use serde::{Deserialize, Serialize};

use super::ops::convolve;
use super::GridDensity;
use crate::error::{Error, Result};
use crate::numeric::trapezoid_by;

const LOG_FLOOR: f64 = 1e-300;

/// Differential entropy `-int f ln f` in nats; samples below `1e-300` count
/// as zero (`0 ln 0 = 0`).
pub fn entropy(d: &GridDensity) -> f64 {
    let v = d.values();
    -trapezoid_by(v.len(), d.dx(), |i| {
        let f = v[i];
        if f < LOG_FLOOR {
            0.0
        } else {
            f * f.ln()
        }
    })
}

/// `exp(2 h)` for a one-dimensional density.
pub fn entropy_power(d: &GridDensity) -> f64 {
    (2.0 * entropy(d)).exp()
}

/// Raw moment `int x^k f`.
pub fn moment(d: &GridDensity, k: u32) -> f64 {
    let grid = d.grid();
    let v = d.values();
    trapezoid_by(v.len(), grid.dx(), |i| grid.x(i).powi(k as i32) * v[i])
}

pub fn mean(d: &GridDensity) -> f64 {
    moment(d, 1)
}

pub fn variance(d: &GridDensity) -> f64 {
    let m = mean(d);
    let grid = d.grid();
    let v = d.values();
    trapezoid_by(v.len(), grid.dx(), |i| {
        let c = grid.x(i) - m;
        c * c * v[i]
    })
}

/// Cumulants `gamma_1 ..= gamma_upto` from raw moments `m_0 = 1, m_1, ...`.
pub fn cumulants_from_moments(raw: &[f64], upto: usize) -> Vec<f64> {
    let mut kappa = vec![0.0; upto + 1];
    for n in 1..=upto {
        let mut k = raw[n];
        let mut binom = 1.0; // C(n-1, m-1)
        for m in 1..n {
            k -= binom * kappa[m] * raw[n - m];
            binom = binom * (n - m) as f64 / m as f64;
        }
        kappa[n] = k;
    }
    kappa.remove(0);
    kappa
}

/// Cumulants `gamma_1 ..= gamma_upto` of `d`, `upto <= 8`.
pub fn cumulants(d: &GridDensity, upto: usize) -> Result<Vec<f64>> {
    if upto > 8 {
        return Err(Error::InvalidArgument(format!("cumulants supported up to order 8, got {upto}")));
    }
    let raw: Vec<f64> = (0..=upto as u32).map(|k| if k == 0 { 1.0 } else { moment(d, k) }).collect();
    Ok(cumulants_from_moments(&raw, upto))
}

/// Log-concavity and symmetry diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub log_concave: bool,
    /// Smallest value of `2 ln d_i - ln d_{i-1} - ln d_{i+1}` (the second
    /// difference of the potential `-ln d`) over the resolved region.
    pub min_second_difference_of_log: f64,
    pub symmetric: bool,
    /// `sup_x |d(x) - d(-x)|`.
    pub max_asymmetry: f64,
    pub lc_tol: f64,
    pub lc_floor: f64,
}

/// Log-concavity from second differences of `ln d` on the region where
/// `d > lc_floor`, and symmetry about the origin.
///
/// Defaults: `lc_floor = 1e-10 max d`, `lc_tol = 1e-7 max |second difference|`.
pub fn shape_report(d: &GridDensity, lc_tol: Option<f64>, lc_floor: Option<f64>) -> ShapeReport {
    let v = d.values();
    let max = d.max_value();
    let lc_floor = lc_floor.unwrap_or(1e-10 * max);
    let first = v.iter().position(|&x| x > lc_floor);
    let last = v.iter().rposition(|&x| x > lc_floor);
    let mut diffs = Vec::new();
    if let (Some(first), Some(last)) = (first, last) {
        // stencils lie entirely inside the resolved region
        for i in first + 1..last {
            let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
            if a <= 0.0 || b <= 0.0 || c <= 0.0 {
                // a zero inside the support breaks log-concavity
                diffs.push(f64::NEG_INFINITY);
            } else {
                diffs.push(2.0 * b.ln() - a.ln() - c.ln());
            }
        }
    }
    let scale = diffs.iter().filter(|x| x.is_finite()).fold(0.0f64, |m, x| m.max(x.abs()));
    let lc_tol = lc_tol.unwrap_or(1e-7 * scale);
    let min_diff = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_diff = if diffs.is_empty() { 0.0 } else { min_diff };

    let grid = d.grid();
    let max_asymmetry = (0..v.len())
        .map(|i| (v[i] - d.value_at(-grid.x(i))).abs())
        .fold(0.0, f64::max);
    ShapeReport {
        log_concave: min_diff >= -lc_tol,
        min_second_difference_of_log: min_diff,
        symmetric: max_asymmetry <= 1e-9 * max,
        max_asymmetry,
        lc_tol,
        lc_floor,
    }
}

/// `D(X) = h(N(mean, var)) - h(X)`.
pub fn relative_entropy_to_gaussian(d: &GridDensity) -> f64 {
    let var = variance(d);
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * var).ln() - entropy(d)
}

/// Entropies of sums and differences of two independent variables and the
/// sum-difference inequalities evaluated on them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumDifferenceReport {
    pub h_sum: f64,
    pub h_diff: f64,
    pub h_x: f64,
    pub h_y: f64,
    /// `3 h(X+Y) - h(X) - h(Y) - h(X-Y)`; nonnegative when the bound holds.
    pub independent_slack: f64,
    pub independent_holds: bool,
    /// `2 h(X+Y) - h(X) - h(X-Y)`, only for identical inputs.
    pub iid_slack: Option<f64>,
    pub iid_holds: Option<bool>,
    /// `D(X)`, only for identical inputs.
    pub relative_entropy: Option<f64>,
    /// `|h(X+Y) - h(X-Y)| / 2`, only for identical inputs.
    pub half_gap: Option<f64>,
    /// Whether `D(X) <= |h(X+Y) - h(X-Y)| / 2`; `None` unless the inputs are
    /// identical and not symmetric about their mean.
    pub gaussianity_bound_holds: Option<bool>,
    /// Identical inputs symmetric about their mean: `X - Y` has the law of a
    /// shift of `X + Y`, so both entropies coincide.
    pub degenerate_symmetric: bool,
}

/// Evaluates `h(X-Y) <= 3h(X+Y) - h(X) - h(Y)` and, for identical inputs,
/// `h(X-Y) <= 2h(X+Y) - h(X)` and `D(X) <= |h(X+Y) - h(X-Y)| / 2`.
pub fn sum_difference_report(d1: &GridDensity, d2: &GridDensity) -> Result<SumDifferenceReport> {
    let sum = convolve(d1, d2)?;
    let diff = convolve(d1, &d2.reflect())?;
    let (h_sum, h_diff, h_x, h_y) = (entropy(&sum), entropy(&diff), entropy(d1), entropy(d2));
    let independent_slack = 3.0 * h_sum - h_x - h_y - h_diff;
    let identical = d1 == d2;
    let mut report = SumDifferenceReport {
        h_sum,
        h_diff,
        h_x,
        h_y,
        independent_slack,
        independent_holds: independent_slack >= 0.0,
        iid_slack: None,
        iid_holds: None,
        relative_entropy: None,
        half_gap: None,
        gaussianity_bound_holds: None,
        degenerate_symmetric: false,
    };
    if identical {
        let iid_slack = 2.0 * h_sum - h_x - h_diff;
        let rel = relative_entropy_to_gaussian(d1);
        let half_gap = 0.5 * (h_sum - h_diff).abs();
        let degenerate = symmetric_about_mean(d1);
        report.iid_slack = Some(iid_slack);
        report.iid_holds = Some(iid_slack >= 0.0);
        report.relative_entropy = Some(rel);
        report.half_gap = Some(half_gap);
        report.degenerate_symmetric = degenerate;
        report.gaussianity_bound_holds = if degenerate { None } else { Some(rel <= half_gap) };
    }
    Ok(report)
}

fn symmetric_about_mean(d: &GridDensity) -> bool {
    let m = mean(d);
    let grid = d.grid();
    let max = d.max_value();
    // compare at mirrored points through interpolation
    let asym = (0..d.len())
        .map(|i| {
            let x = grid.x(i);
            (d.value_at(x) - d.value_at(2.0 * m - x)).abs()
        })
        .fold(0.0, f64::max);
    asym <= 1e-3 * max
}
