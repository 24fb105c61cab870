use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::construction::Counterexample;
use crate::density::{align_difference, linear_convolution, normalized_iid_sum, GridDensity};
use crate::edgeworth::{hermite, std_normal_pdf};
use crate::error::{Error, Result};
use crate::numeric::trapezoid_by;

/// `N(0, 2)` density.
fn phi2(x: f64) -> f64 {
    std_normal_pdf(x / std::f64::consts::SQRT_2) / std::f64::consts::SQRT_2
}

/// `K = int (f * phi)'''' ln (f * phi)`.
///
/// With `r = f - phi`, `f * phi = phi_2 + r * phi` where `phi_2` is the
/// `N(0, 2)` density. Both `int phi_2'''' ln phi_2` and
/// `int (r * phi)'''' ln phi_2` vanish (`ln phi_2` is quadratic), so
/// `K = int (phi_2'''' + r * phi'''') log1p((r * phi) / phi_2)`. The
/// convolutions with `phi` and `phi'''' = phi H_4` are direct sums over the
/// grid against exact kernel samples.
pub fn k_functional(f: &GridDensity) -> f64 {
    let grid = f.grid();
    let n = grid.len();
    let dx = grid.dx();
    let r: Vec<(usize, f64)> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            (i, w * (v - std_normal_pdf(grid.x(i))))
        })
        .filter(|&(_, v)| v != 0.0)
        .collect();
    // kernel samples at lattice offsets 0..n
    let k0: Vec<f64> = (0..n).map(|m| std_normal_pdf(m as f64 * dx)).collect();
    let k4: Vec<f64> = (0..n).map(|m| std_normal_pdf(m as f64 * dx) * hermite(4, m as f64 * dx)).collect();
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let x = grid.x(k);
            let p2 = phi2(x);
            if p2 < 1e-300 {
                return 0.0;
            }
            let (mut u, mut v) = (0.0, 0.0);
            for &(j, rj) in &r {
                let m = k.abs_diff(j);
                u += rj * k0[m];
                v += rj * k4[m];
            }
            let (u, v) = (u * dx, v * dx);
            let p2_4 = p2 * hermite(4, x / std::f64::consts::SQRT_2) / 4.0;
            (p2_4 + v) * (u / p2).ln_1p()
        })
        .collect();
    trapezoid_by(n, dx, |k| terms[k])
}

/// One row of the entropy-gap table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    /// `h(X_0 + Z_n) - h(X_0 + Z)`.
    pub delta_n: f64,
    pub n_delta_n: f64,
    /// Leading-order prediction `-(1/n)(1/4!)(E X^4 - 3) K`.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub rows: Vec<GapRow>,
    /// `-(1/4!)(E X^4 - 3) K`, the predicted limit of `n Delta_n`.
    pub predicted_slope: f64,
    /// Smallest listed `n` from which every listed `Delta_m` (`m >= n`) is
    /// positive.
    pub n0: Option<usize>,
}

impl GapTable {
    /// `|n Delta_n - slope| / |slope|` at the largest listed `n`.
    pub fn relative_agreement_at_largest(&self) -> Option<f64> {
        let last = self.rows.last()?;
        Some((last.n_delta_n - self.predicted_slope).abs() / self.predicted_slope.abs())
    }
}

/// Samples of `a` on the lattice `lo + k dx`, `k in [start, start + len)`.
fn window(values: &[f64], offset: i64, start: i64, len: usize) -> Vec<f64> {
    (0..len as i64)
        .map(|k| {
            let idx = start + k - offset;
            if idx >= 0 && (idx as usize) < values.len() {
                values[idx as usize]
            } else {
                0.0
            }
        })
        .collect()
}

/// `h(X_0 + Z_n) - h(X_0 + Z)` for `X_0 ~ f`, where `Z_n` is the normalized
/// sum of `n` independent copies of `f` and `Z` is standard normal.
///
/// `Z` is replaced by the normalized sum of `n` grid Gaussians, which has
/// the same discretization error as `Z_n`. With `B = f * p_n(phi)` and
/// `E = f * (p_n(f) - p_n(phi))` the gap is
/// `-int [E ln B + (B + E) log1p(E / B)]`, which avoids subtracting two
/// nearly equal entropies.
fn gap(f: &GridDensity, phi: &GridDensity, n: usize) -> Result<f64> {
    let pn_f = normalized_iid_sum(f, n)?;
    let pn_g = normalized_iid_sum(phi, n)?;
    let (dgrid, diff) = align_difference(&pn_f, &pn_g)?;
    let dx = f.dx();
    let b = linear_convolution(f.values(), pn_g.values());
    let e = linear_convolution(f.values(), &diff);
    let b_lo = f.grid().lo() + pn_g.grid().lo();
    let e_lo = f.grid().lo() + dgrid.lo();
    let offset = ((e_lo - b_lo) / dx).round() as i64;
    let e = window(&e, offset, 0, b.len());
    let b_max = b.iter().cloned().fold(0.0, f64::max) * dx;
    // below this B carries only round-off; the gap integrand there is O(B)
    let floor = 1e-13 * b_max;
    // `0.0 -` keeps an exact zero from printing as -0
    Ok(0.0 - trapezoid_by(b.len(), dx, |k| {
        let bk = b[k] * dx;
        if bk <= floor {
            return 0.0;
        }
        let ek = e[k] * dx;
        ek * bk.ln() + (bk + ek) * (ek / bk).ln_1p()
    }))
}

/// Entropy gaps for each `n` in `n_list` (`2 <= n <= 256`, increasing) with
/// the leading-order prediction `-(1/n)(1/4!)(ex4_minus_3) k`.
pub fn entropy_gap_experiment(f: &GridDensity, n_list: &[usize], ex4_minus_3: f64, k: f64) -> Result<GapTable> {
    if n_list.is_empty() || n_list.iter().any(|&n| !(2..=256).contains(&n)) {
        return Err(Error::InvalidArgument("n_list entries must lie in [2, 256]".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n_list must be increasing".into()));
    }
    let phi = GridDensity::gaussian(0.0, 1.0, *f.grid())?;
    let predicted_slope = 0.0 - ex4_minus_3 * k / 24.0;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let delta_n = gap(f, &phi, n)?;
        rows.push(GapRow { n, delta_n, n_delta_n: n as f64 * delta_n, predicted: predicted_slope / n as f64 });
    }
    let mut n0 = None;
    for row in rows.iter().rev() {
        if row.delta_n > 0.0 {
            n0 = Some(row.n);
        } else {
            break;
        }
    }
    Ok(GapTable { rows, predicted_slope, n0 })
}

/// Everything the counterexample pipeline reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSummary {
    pub epsilon: f64,
    pub kappa: f64,
    pub eta: f64,
    #[serde(rename = "EX4_minus_3")]
    pub ex4_minus_3: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub gap_table: Vec<GapRow>,
    pub predicted_slope: f64,
    pub n0: Option<usize>,
}

impl CounterexampleSummary {
    pub fn new(c: &Counterexample, table: &GapTable) -> Self {
        Self {
            epsilon: c.perturbation.epsilon,
            kappa: c.perturbation.fourth_moment_tilt,
            eta: c.perturbation.mollify_width,
            ex4_minus_3: c.ex4_minus_3,
            k: c.k,
            j1: c.j.j1,
            j2: c.j.j2,
            j: c.j.j_combined,
            gap_table: table.rows.clone(),
            predicted_slope: table.predicted_slope,
            n0: table.n0,
        }
    }
}
