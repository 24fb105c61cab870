//! Edgeworth expansion for the density of normalized i.i.d. sums.
//!
//! With `p_n` the density of `(X_1 + ... + X_n) / sqrt(n)` for a standardized
//! `X`, the approximant of order `m` is
//! `phi_m = phi + sum_{k=1}^{m-2} q_k n^{-k/2}`, where
//! `q_k = phi * sum H_{k+2j} prod_i (gamma_{i+2} / (i+2)!)^{r_i} / r_i!` and
//! the sum runs over nonnegative `r` with `r_1 + 2 r_2 + ... + k r_k = k`,
//! `j = r_1 + ... + r_k`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::density::{cumulants, normalized_iid_sum, Grid, GridDensity, GridFunction};
use crate::error::{Error, Result};
use crate::numeric::ls_slope;

/// Largest supported expansion order.
pub const MAX_ORDER: usize = 6;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Probabilists' Hermite polynomial `H_n(x)`, so that
/// `phi^{(n)} = (-1)^n H_n phi`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// One solution of `r_1 + 2 r_2 + ... + k r_k = k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    pub r: Vec<u32>,
    /// `r_1 + ... + r_k`.
    pub j: u32,
}

/// All nonnegative integer solutions of `r_1 + 2 r_2 + ... + k r_k = k`,
/// in lexicographically decreasing order of `r`.
pub fn integer_solutions(k: usize) -> Vec<Partition> {
    fn rec(i: usize, remaining: usize, r: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if i == 0 {
            if remaining == 0 {
                let r = r.iter().rev().cloned().collect::<Vec<_>>();
                let j = r.iter().sum();
                out.push(Partition { r, j });
            }
            return;
        }
        // fill r_i for i = k, k-1, ..., 1 so the result comes out ordered by r_1
        for c in (0..=remaining / i).rev() {
            r.push(c as u32);
            rec(i - 1, remaining - c * i, r, out);
            r.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    rec(k, k, &mut Vec::with_capacity(k), &mut out);
    // order by r_1 first, then r_2, ... descending
    out.sort_by(|a, b| b.r.cmp(&a.r));
    out
}

/// Cumulants `gamma_3, gamma_4, ...` of a standardized law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantVector {
    gammas: Vec<f64>,
}

impl CumulantVector {
    /// `gammas[0]` is `gamma_3`.
    pub fn new(gammas: Vec<f64>) -> Self {
        Self { gammas }
    }

    /// The Gaussian: all higher cumulants vanish.
    pub fn gaussian(m: usize) -> Self {
        Self { gammas: vec![0.0; m.saturating_sub(2)] }
    }

    /// Cumulants `gamma_3 ..= gamma_m` of a grid density, which must have
    /// mean 0 and variance 1 to within `1e-6`.
    pub fn from_density(d: &GridDensity, m: usize) -> Result<Self> {
        let c = cumulants(d, m.max(2))?;
        if c[0].abs() > 1e-6 || (c[1] - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "density is not standardized: mean {:.3e}, variance {:.9}",
                c[0], c[1]
            )));
        }
        Ok(Self { gammas: c[2..].to_vec() })
    }

    /// `gamma_k`, with `gamma_1 = 0`, `gamma_2 = 1`.
    pub fn gamma(&self, k: usize) -> Option<f64> {
        match k {
            0 => None,
            1 => Some(0.0),
            2 => Some(1.0),
            _ => self.gammas.get(k - 3).copied(),
        }
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Highest cumulant order available.
    pub fn max_order(&self) -> usize {
        self.gammas.len() + 2
    }
}

/// Expansion of order `m` with its cumulants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthModel {
    m: usize,
    cumulants: CumulantVector,
}

impl EdgeworthModel {
    pub fn new(m: usize, cumulants: CumulantVector) -> Result<Self> {
        if !(2..=MAX_ORDER).contains(&m) {
            return Err(Error::InvalidArgument(format!("expansion order must be in 2..=6, got {m}")));
        }
        if cumulants.max_order() < m {
            return Err(Error::InvalidArgument(format!(
                "order {m} needs cumulants up to gamma_{m}, have up to gamma_{}",
                cumulants.max_order()
            )));
        }
        Ok(Self { m, cumulants })
    }

    pub fn from_density(d: &GridDensity, m: usize) -> Result<Self> {
        Self::new(m, CumulantVector::from_density(d, m)?)
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn cumulants(&self) -> &CumulantVector {
        &self.cumulants
    }

    /// Polynomial coefficients of `q_k / phi` in the Hermite basis:
    /// pairs `(degree, coefficient)`.
    fn hermite_terms(&self, k: usize) -> Vec<(usize, f64)> {
        let mut terms = Vec::new();
        for p in integer_solutions(k) {
            let mut coef = 1.0;
            for (i0, &ri) in p.r.iter().enumerate() {
                if ri == 0 {
                    continue;
                }
                let i = i0 + 1;
                let g = self.cumulants.gamma(i + 2).unwrap_or(0.0) / factorial(i + 2);
                coef *= g.powi(ri as i32) / factorial(ri as usize);
            }
            if coef != 0.0 {
                terms.push((k + 2 * p.j as usize, coef));
            }
        }
        terms
    }

    /// `sum_{k=1}^{m-2} q_k(x) n^{-k/2}` divided by `phi(x)`.
    fn correction_factor(&self, terms: &[Vec<(usize, f64)>], n: usize, x: f64) -> f64 {
        let mut total = 0.0;
        for (k0, tk) in terms.iter().enumerate() {
            let k = k0 + 1;
            let s: f64 = tk.iter().map(|&(deg, c)| c * hermite(deg, x)).sum();
            total += s * (n as f64).powf(-(k as f64) / 2.0);
        }
        total
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Correction term `q_k(x)`, `1 <= k <= m - 2`.
pub fn q_k(model: &EdgeworthModel, k: usize, x: f64) -> Result<f64> {
    if k == 0 || k + 2 > model.m {
        return Err(Error::InvalidArgument(format!(
            "q_k needs 1 <= k <= m - 2 = {}, got {k}",
            model.m - 2
        )));
    }
    let s: f64 = model.hermite_terms(k).iter().map(|&(deg, c)| c * hermite(deg, x)).sum();
    Ok(std_normal_pdf(x) * s)
}

/// Samples `phi_m` for sums of `n` terms on `grid`.
pub fn edgeworth_density(model: &EdgeworthModel, n: usize, grid: &Grid) -> GridFunction {
    let values = edgeworth_values(model, n.max(1), grid.points());
    GridFunction { grid: *grid, values }
}

fn edgeworth_values<I: Iterator<Item = f64>>(model: &EdgeworthModel, n: usize, xs: I) -> Vec<f64> {
    let terms: Vec<_> = (1..=model.m - 2).map(|k| model.hermite_terms(k)).collect();
    xs.map(|x| std_normal_pdf(x) * (1.0 + model.correction_factor(&terms, n, x))).collect()
}

/// One row of an [`EdgeworthErrorReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    /// `sup_x (1 + |x|^m) |p_n(x) - phi_m(x)|` over the grid of `p_n`.
    pub sup_weighted_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthErrorReport {
    pub m: usize,
    pub rows: Vec<ErrorRow>,
    /// Least-squares slope of `ln error` against `ln n`; `None` with fewer
    /// than two rows.
    pub fit_exponent: Option<f64>,
}

impl EdgeworthErrorReport {
    /// CSV with header `n,sup_weighted_error,fit_exponent`; the exponent is
    /// repeated on each row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,sup_weighted_error,fit_exponent")?;
        let fit = self.fit_exponent.map(|e| format!("{e:.16e}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(out, "{},{:.16e},{fit}", r.n, r.sup_weighted_error)?;
        }
        Ok(())
    }
}

/// Weighted sup distance between `p_n` and `phi_m` for each `n`, with the
/// fitted decay exponent.
pub fn edgeworth_error_report(d: &GridDensity, m: usize, n_list: &[usize]) -> Result<EdgeworthErrorReport> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidArgument("n_list must be nonempty and positive".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n_list must be increasing".into()));
    }
    let model = EdgeworthModel::from_density(d, m)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let pn = normalized_iid_sum(d, n)?;
        let grid = pn.grid();
        let approx = edgeworth_values(&model, n, grid.points());
        let sup = grid
            .points()
            .zip(pn.values().iter().zip(&approx))
            .map(|(x, (p, a))| (1.0 + x.abs().powi(m as i32)) * (p - a).abs())
            .fold(0.0, f64::max);
        rows.push(ErrorRow { n, sup_weighted_error: sup });
    }
    let fit_exponent = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.sup_weighted_error.ln()).collect();
        Some(ls_slope(&xs, &ys))
    } else {
        None
    };
    Ok(EdgeworthErrorReport { m, rows, fit_exponent })
}
