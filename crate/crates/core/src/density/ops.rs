use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Grid, GridDensity, MASS_TOL, TAIL_TOL};
use crate::error::{Error, Result};
use crate::numeric::trapezoid;

/// Tail samples below `CROP_REL * max` are trimmed after convolution and
/// rescaling; they sit at the FFT round-off floor.
pub const CROP_REL: f64 = 1e-16;

fn fft_pair(len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
}

/// Linear convolution of two sample vectors (no scaling).
pub(crate) fn linear_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= 32 {
        let mut out = vec![0.0; out_len];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let len = out_len.next_power_of_two();
    let (fwd, inv) = fft_pair(len);
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(len, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(len, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / len as f64;
    fa.iter().take(out_len).map(|c| c.re * scale).collect()
}

/// Number of samples that can be trimmed from each end: the same count on
/// both sides so symmetric grids stay symmetric.
fn crop_count(values: &[f64]) -> usize {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let threshold = (CROP_REL * max).min(1e-3 * TAIL_TOL);
    let left = values.iter().take_while(|&&v| v <= threshold).count();
    let right = values.iter().rev().take_while(|&&v| v <= threshold).count();
    // one trimmed-level sample stays at each end so that compact supports
    // keep a negligible endpoint
    let k = left.min(right).saturating_sub(1);
    // keep at least three points
    k.min(values.len().saturating_sub(3) / 2)
}

/// Density of `X + Y` for independent `X ~ d1`, `Y ~ d2`.
///
/// Discrete convolution scaled by `dx`, computed with a zero-padded FFT. The
/// result lives on the Minkowski sum of the two grids, with round-off tails
/// cropped.
pub fn convolve(d1: &GridDensity, d2: &GridDensity) -> Result<GridDensity> {
    if !d1.grid().same_spacing(d2.grid()) {
        return Err(Error::SpacingMismatch(d1.dx(), d2.dx()));
    }
    let dx = d1.dx();
    let mut values = linear_convolution(d1.values(), d2.values());
    values.iter_mut().for_each(|v| *v = (*v * dx).max(0.0));
    let k = crop_count(&values);
    let kept: Vec<f64> = values[k..values.len() - k].to_vec();
    let raw_mass = trapezoid(&kept, dx);
    let expected = d1.total_mass() * d2.total_mass();
    if (raw_mass - expected).abs() > MASS_TOL {
        return Err(Error::Truncation(format!(
            "convolution mass {raw_mass} deviates from {expected} by more than {MASS_TOL:e}"
        )));
    }
    let lo = d1.grid().lo() + d2.grid().lo() + k as f64 * dx;
    let grid = Grid::from_spacing(lo, dx, kept.len())?;
    GridDensity::new(grid, kept)
}

/// Density of `a X`, resampled onto the lattice of the input grid.
///
/// Values come from four-point interpolation of `x -> d(x / a) / |a|`;
/// negative interpolation overshoots are clamped to zero before
/// renormalizing.
pub fn scale_rv(d: &GridDensity, a: f64) -> Result<GridDensity> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("scale factor must be finite and nonzero, got {a}")));
    }
    if a == 1.0 {
        return Ok(d.clone());
    }
    let grid = d.grid();
    let dx = grid.dx();
    let (y0, y1) = {
        let (p, q) = (a * grid.lo(), a * grid.hi());
        (p.min(q), p.max(q))
    };
    // lattice points lo + k dx covering [y0, y1]
    let k_lo = ((y0 - grid.lo()) / dx).floor() as i64 - 1;
    let k_hi = ((y1 - grid.lo()) / dx).ceil() as i64 + 1;
    let n_out = (k_hi - k_lo + 1) as usize;
    let out_lo = grid.lo() + k_lo as f64 * dx;
    let inv_abs = 1.0 / a.abs();
    let mut values: Vec<f64> = (0..n_out)
        .map(|j| {
            let y = out_lo + j as f64 * dx;
            (d.value_at(y / a) * inv_abs).max(0.0)
        })
        .collect();
    let k = crop_count(&values);
    values = values[k..values.len() - k].to_vec();
    let out_grid = Grid::from_spacing(out_lo + k as f64 * dx, dx, values.len())?;
    GridDensity::new(out_grid, values)
}

/// Density of `(X_1 + ... + X_n) / sqrt(n)` for i.i.d. `X_i ~ d`.
///
/// The n-fold sum is formed at unit scale by repeated squaring (equivalent to
/// `n - 1` successive convolutions) and rescaled once at the end.
pub fn normalized_iid_sum(d: &GridDensity, n: usize) -> Result<GridDensity> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if n == 1 {
        return Ok(d.clone());
    }
    let sum = iid_sum(d, n)?;
    scale_rv(&sum, 1.0 / (n as f64).sqrt())
}

fn iid_sum(d: &GridDensity, n: usize) -> Result<GridDensity> {
    let mut result: Option<GridDensity> = None;
    let mut power = d.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => convolve(&r, &power)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        power = convolve(&power, &power)?;
    }
    Ok(result.expect("n >= 1"))
}

/// Pointwise `a - b` on the union of the two grids. Both densities must share
/// the spacing and the lattice phase.
pub fn align_difference(a: &GridDensity, b: &GridDensity) -> Result<(Grid, Vec<f64>)> {
    if !a.grid().same_spacing(b.grid()) {
        return Err(Error::SpacingMismatch(a.dx(), b.dx()));
    }
    let dx = a.dx();
    let offset = (b.grid().lo() - a.grid().lo()) / dx;
    let shift = offset.round();
    if (offset - shift).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "grids are not on a common lattice (offset {offset} points)"
        )));
    }
    let shift = shift as i64;
    let a_start = 0i64;
    let a_end = a.len() as i64;
    let b_start = shift;
    let b_end = shift + b.len() as i64;
    let lo_idx = a_start.min(b_start);
    let hi_idx = a_end.max(b_end);
    let n = (hi_idx - lo_idx) as usize;
    let values = (0..n)
        .map(|j| {
            let idx = lo_idx + j as i64;
            let va = if idx >= a_start && idx < a_end { a.values()[idx as usize] } else { 0.0 };
            let bi = idx - shift;
            let vb = if bi >= 0 && bi < b.len() as i64 { b.values()[bi as usize] } else { 0.0 };
            va - vb
        })
        .collect();
    let grid = Grid::from_spacing(a.grid().lo() + lo_idx as f64 * dx, dx, n)?;
    Ok((grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{entropy, moment};
    use approx::assert_abs_diff_eq;

    fn sup_dist(a: &GridDensity, f: impl Fn(f64) -> f64) -> f64 {
        a.grid().points().zip(a.values()).map(|(x, v)| (v - f(x)).abs()).fold(0.0, f64::max)
    }

    fn normal_pdf(var: f64) -> impl Fn(f64) -> f64 {
        move |x| (-0.5 * x * x / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    }

    #[test]
    fn gaussian_convolution_is_gaussian() {
        let g = Grid::new(-12.0, 12.0, 8192).unwrap();
        let d = GridDensity::gaussian(0.0, 1.0, g).unwrap();
        let s = convolve(&d, &d).unwrap();
        assert!(sup_dist(&s, normal_pdf(2.0)) < 1e-6);
    }

    #[test]
    fn uniform_convolution_is_triangle() {
        let g = Grid::new(-0.5, 1.5, 4001).unwrap();
        let u = GridDensity::uniform(0.0, 1.0, g).unwrap();
        let t = convolve(&u, &u).unwrap();
        assert_abs_diff_eq!(t.value_at(1.0), 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(t.value_at(0.5), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(t.value_at(2.2), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn narrow_gaussian_is_approximate_identity() {
        let g = Grid::new(-10.0, 10.0, 20001).unwrap();
        let f = GridDensity::gaussian_mixture(&[(0.5, -1.0, 0.5), (0.5, 1.5, 0.8)], g).unwrap();
        let narrow = GridDensity::gaussian(0.0, 1e-6, Grid::new(-0.05, 0.05, 101).unwrap()).unwrap();
        let h = convolve(&f, &narrow).unwrap();
        let err = h.grid().points().zip(h.values()).map(|(x, v)| (v - f.value_at(x)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "sup error {err}");
    }

    #[test]
    fn mismatched_spacing_rejected() {
        let a = GridDensity::gaussian(0.0, 1.0, Grid::new(-10.0, 10.0, 1001).unwrap()).unwrap();
        let b = GridDensity::gaussian(0.0, 1.0, Grid::new(-10.0, 10.0, 1002).unwrap()).unwrap();
        assert!(matches!(convolve(&a, &b), Err(Error::SpacingMismatch(..))));
    }

    #[test]
    fn scale_identity_and_reflection() {
        let g = Grid::new(-12.0, 12.0, 4097).unwrap();
        let d = GridDensity::gaussian(0.0, 1.0, g).unwrap();
        assert_eq!(scale_rv(&d, 1.0).unwrap(), d);
        let r = scale_rv(&d, -1.0).unwrap();
        let err = r.grid().points().zip(r.values()).map(|(x, v)| (v - d.value_at(x)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn scale_by_sqrt_two_gives_variance_two() {
        let g = Grid::new(-12.0, 12.0, 8192).unwrap();
        let d = GridDensity::gaussian(0.0, 1.0, g).unwrap();
        let s = scale_rv(&d, 2f64.sqrt()).unwrap();
        assert!(sup_dist(&s, normal_pdf(2.0)) < 1e-7);
        assert_abs_diff_eq!(entropy(&s) - entropy(&d), 0.5 * 2f64.ln(), epsilon = 1e-5);
        assert_abs_diff_eq!(moment(&s, 2), 2.0, epsilon = 1e-8);
    }

    #[test]
    fn shrinking_a_compact_support_keeps_negligible_endpoints() {
        let d = GridDensity::uniform(-3f64.sqrt(), 3f64.sqrt(), Grid::new(-4.0, 4.0, 8001).unwrap()).unwrap();
        let s = scale_rv(&d, 0.5).unwrap();
        assert_eq!(s.values()[0], 0.0);
        assert_eq!(*s.values().last().unwrap(), 0.0);
        assert_abs_diff_eq!(entropy(&s) - entropy(&d), 0.5f64.ln(), epsilon = 1e-3);
    }

    #[test]
    fn scale_rejects_zero() {
        let d = GridDensity::gaussian(0.0, 1.0, Grid::new(-12.0, 12.0, 513).unwrap()).unwrap();
        assert!(scale_rv(&d, 0.0).is_err());
    }

    #[test]
    fn iid_sum_of_one_is_identity() {
        let d = GridDensity::uniform(-3f64.sqrt(), 3f64.sqrt(), Grid::new(-4.0, 4.0, 801).unwrap()).unwrap();
        assert_eq!(normalized_iid_sum(&d, 1).unwrap(), d);
    }

    #[test]
    fn gaussian_is_a_fixed_point_of_normalized_sums() {
        let g = Grid::new(-12.0, 12.0, 4096).unwrap();
        let d = GridDensity::gaussian(0.0, 1.0, g).unwrap();
        for n in [2, 3, 7, 16] {
            let p = normalized_iid_sum(&d, n).unwrap();
            assert!(sup_dist(&p, normal_pdf(1.0)) < 1e-5, "n = {n}");
        }
    }

    #[test]
    fn align_difference_handles_offsets() {
        let g = Grid::new(-12.0, 12.0, 2401).unwrap();
        let a = GridDensity::gaussian(0.0, 1.0, g).unwrap();
        let b = a.shift_by_points(3);
        let (grid, diff) = align_difference(&a, &b).unwrap();
        assert_eq!(grid.len(), a.len() + 3);
        assert_abs_diff_eq!(diff.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
    }
}
