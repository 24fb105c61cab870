use serde::{Deserialize, Serialize};
use libm::erf;

use super::kernels::{compute_j, JResult, DEFAULT_J_STEP};
use super::{gap::k_functional, PerturbationG, SignedFunction};
use crate::density::{moment, shape_report, variance, Grid, GridDensity, GridFunction};
use crate::edgeworth::std_normal_pdf;
use crate::error::{Error, Result};
use crate::numeric::trapezoid_by;

/// Default mollifier width.
pub const DEFAULT_ETA: f64 = 0.05;
/// Tilt used while searching for epsilon.
pub const PROBE_KAPPA: f64 = 1e-3;
/// Upper end of the epsilon search.
pub const DEFAULT_EPS_MAX: f64 = 0.05;
/// Smallest epsilon the search accepts.
pub const MIN_EPS: f64 = 1e-5;

/// Mollifier truncation, in widths.
const MOLLIFIER_CUT: f64 = 5.0;
/// Bump truncation, in widths.
const BUMP_CUT: f64 = 6.0;
/// Projection bumps `(center, width)`.
const PROJECTION_BUMPS: [(f64, f64); 2] = [(1.3, 0.12), (1.7, 0.12)];
/// Fourth-moment tilt bump `(center, width)`.
const TILT_BUMP: (f64, f64) = (1.5, 0.1);
/// Support bound of the realized perturbation.
const SUPPORT: f64 = 2.5;
const MOMENT_TOL: f64 = 1e-9;

/// Even pair of truncated Gaussian bumps at `+-center`.
pub fn bump_pair(x: f64, center: f64, width: f64) -> f64 {
    let one = |d: f64| {
        if d.abs() > BUMP_CUT * width {
            0.0
        } else {
            (-0.5 * d * d / (width * width)).exp()
        }
    };
    one(x - center) + one(x + center)
}

/// `(g * k_eta)(x)` with `k_eta` the centered Gaussian of standard deviation
/// `eta` truncated at `5 eta` and renormalized. Evaluated in closed form; the
/// kernel is even, so all even moments of `g` up to order four are kept.
pub fn mollified_g(g: &PerturbationG, eta: f64, x: f64) -> f64 {
    let c = g.coeffs();
    half_mollified(&c, eta, x) + half_mollified(&c, eta, -x)
}

/// Contribution of the piece `1 <= s <= 2`.
fn half_mollified(c: &[f64; 4], eta: f64, x: f64) -> f64 {
    let r = MOLLIFIER_CUT * eta;
    let s_lo = 1f64.max(x - r);
    let s_hi = 2f64.min(x + r);
    if s_lo >= s_hi {
        return 0.0;
    }
    let [c3, c2, c1, c0] = *c;
    // substitute s = x - u and expand the cubic in powers of u
    let p0 = ((c3 * x + c2) * x + c1) * x + c0;
    let p1 = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    let p2 = 3.0 * c3 * x + c2;
    let (u_lo, u_hi) = (x - s_hi, x - s_lo);
    let e2 = eta * eta;
    let gauss = |u: f64| (-0.5 * u * u / e2).exp();
    let sqrt2 = std::f64::consts::SQRT_2;
    let i0 = eta * (std::f64::consts::PI / 2.0).sqrt() * (erf(u_hi / (eta * sqrt2)) - erf(u_lo / (eta * sqrt2)));
    let bracket = |f: &dyn Fn(f64) -> f64| f(u_hi) - f(u_lo);
    let i1 = -e2 * bracket(&|u| gauss(u));
    let i2 = e2 * i0 - e2 * bracket(&|u| u * gauss(u));
    let i3 = 2.0 * e2 * i1 - e2 * bracket(&|u| u * u * gauss(u));
    let z = eta * (2.0 * std::f64::consts::PI).sqrt() * erf(MOLLIFIER_CUT / sqrt2);
    (p0 * i0 - p1 * i1 + p2 * i2 - c3 * i3) / z
}

/// Perturbation parameters: `delta = epsilon (g_tilde + kappa w)` where
/// `g_tilde` is the mollified `g` projected to `int = int x^2 = 0` and `w`
/// is the projected tilt bump with `int w x^4 < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePerturbation {
    pub base: PerturbationG,
    /// Mollifier width `eta`.
    pub mollify_width: f64,
    /// Tilt coefficient `kappa`.
    pub fourth_moment_tilt: f64,
    pub epsilon: f64,
}

impl AdmissiblePerturbation {
    pub fn new(base: PerturbationG, mollify_width: f64, fourth_moment_tilt: f64, epsilon: f64) -> Result<Self> {
        if !(mollify_width > 0.0 && mollify_width <= 0.1) {
            return Err(Error::InvalidArgument(format!("mollifier width must be in (0, 0.1], got {mollify_width}")));
        }
        if !(fourth_moment_tilt >= 0.0 && fourth_moment_tilt.is_finite()) {
            return Err(Error::InvalidArgument(format!("tilt must be finite and >= 0, got {fourth_moment_tilt}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        Ok(Self { base, mollify_width, fourth_moment_tilt, epsilon })
    }

    /// The unscaled shape `g_tilde + kappa w`, with projection coefficients
    /// fitted by trapezoid moments on `grid`.
    pub fn shape(&self, grid: &Grid) -> Result<PerturbationShape> {
        if grid.lo() > -SUPPORT || grid.hi() < SUPPORT {
            return Err(Error::InvalidGrid(format!("grid must cover [-{SUPPORT}, {SUPPORT}]")));
        }
        let eta = self.mollify_width;
        let base = self.base.clone();
        let raw = grid.sample(|x| mollified_g(&base, eta, x));
        let tilt = grid.sample(|x| bump_pair(x, TILT_BUMP.0, TILT_BUMP.1));
        let b: Vec<Vec<f64>> = PROJECTION_BUMPS.iter().map(|&(c, w)| grid.sample(|x| bump_pair(x, c, w))).collect();
        let mom = |v: &[f64], p: i32| trapezoid_by(v.len(), grid.dx(), |i| v[i] * grid.x(i).powi(p));
        let a = [[mom(&b[0], 0), mom(&b[1], 0)], [mom(&b[0], 2), mom(&b[1], 2)]];
        let solve = |r: [f64; 2]| {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            [(r[0] * a[1][1] - a[0][1] * r[1]) / det, (a[0][0] * r[1] - r[0] * a[1][0]) / det]
        };
        let g_proj = solve([mom(&raw, 0), mom(&raw, 2)]);
        let w_proj = solve([mom(&tilt, 0), mom(&tilt, 2)]);
        let w_vals: Vec<f64> = (0..grid.len()).map(|i| tilt[i] - w_proj[0] * b[0][i] - w_proj[1] * b[1][i]).collect();
        let g_vals: Vec<f64> = (0..grid.len()).map(|i| raw[i] - g_proj[0] * b[0][i] - g_proj[1] * b[1][i]).collect();
        Ok(PerturbationShape {
            base,
            eta,
            kappa: self.fourth_moment_tilt,
            g_proj,
            w_proj,
            g_fourth_moment: mom(&g_vals, 4),
            w_fourth_moment: mom(&w_vals, 4),
        })
    }

    /// `delta` sampled on `grid`.
    pub fn realized(&self, grid: &Grid) -> Result<GridFunction> {
        let shape = self.shape(grid)?;
        let eps = self.epsilon;
        Ok(GridFunction { grid: *grid, values: grid.sample(|x| eps * shape.eval(x)) })
    }
}

/// `g_tilde + kappa w` as an analytic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationShape {
    base: PerturbationG,
    eta: f64,
    kappa: f64,
    g_proj: [f64; 2],
    w_proj: [f64; 2],
    /// `int g_tilde x^4` on the fitting grid.
    pub g_fourth_moment: f64,
    /// `int w x^4` on the fitting grid.
    pub w_fourth_moment: f64,
}

impl PerturbationShape {
    fn projection(&self, x: f64, c: [f64; 2]) -> f64 {
        c[0] * bump_pair(x, PROJECTION_BUMPS[0].0, PROJECTION_BUMPS[0].1)
            + c[1] * bump_pair(x, PROJECTION_BUMPS[1].0, PROJECTION_BUMPS[1].1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let g = mollified_g(&self.base, self.eta, x) - self.projection(x, self.g_proj);
        if self.kappa == 0.0 {
            return g;
        }
        let w = bump_pair(x, TILT_BUMP.0, TILT_BUMP.1) - self.projection(x, self.w_proj);
        g + self.kappa * w
    }

    fn is_zero(&self) -> bool {
        self.base.is_zero() && self.kappa == 0.0
    }
}

impl SignedFunction for PerturbationShape {
    fn eval(&self, s: f64) -> f64 {
        PerturbationShape::eval(self, s)
    }

    fn pieces(&self) -> Vec<(f64, f64)> {
        if self.is_zero() {
            return Vec::new();
        }
        // break at the kinks of the mollified g
        let r = MOLLIFIER_CUT * self.eta;
        let cuts = [0.5, 1.0 - r, 1.0 + r, 2.0 - r, 2.0 + r, SUPPORT];
        let mut out: Vec<(f64, f64)> = cuts.windows(2).rev().map(|w| (-w[1], -w[0])).collect();
        out.extend(cuts.windows(2).map(|w| (w[0], w[1])));
        out
    }
}

fn constraint(msg: impl Into<String>) -> Error {
    Error::Constraint(msg.into())
}

fn build_from_values(grid: &Grid, delta: &[f64]) -> Result<GridDensity> {
    let dx = grid.dx();
    let max_abs = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if max_abs > 0.25 {
        return Err(constraint(format!("|delta| <= 1/4 violated: max |delta| = {max_abs}")));
    }
    let nontrivial = max_abs > 0.0;
    let mut values = Vec::with_capacity(delta.len());
    for (i, d) in delta.iter().enumerate() {
        let x = grid.x(i);
        if x.abs() > SUPPORT + 1e-12 && *d != 0.0 {
            return Err(constraint(format!("support of delta exceeds [-{SUPPORT}, {SUPPORT}] at x = {x}")));
        }
        let phi = std_normal_pdf(x);
        let f = phi + d;
        if f < 0.5 * phi || f > 2.0 * phi {
            return Err(constraint(format!("phi/2 <= f <= 2 phi violated at x = {x}")));
        }
        values.push(f);
    }
    let m0 = trapezoid_by(delta.len(), dx, |i| delta[i]);
    let m2 = trapezoid_by(delta.len(), dx, |i| delta[i] * grid.x(i).powi(2));
    let m4 = trapezoid_by(delta.len(), dx, |i| delta[i] * grid.x(i).powi(4));
    if m0.abs() > MOMENT_TOL || m2.abs() > MOMENT_TOL {
        return Err(constraint(format!("int delta = {m0:e}, int delta x^2 = {m2:e}; both must vanish")));
    }
    if nontrivial && m4 >= 0.0 {
        return Err(constraint(format!("int delta x^4 = {m4:e} must be negative")));
    }
    let f = GridDensity::new(*grid, values)?;
    let shape = shape_report(&f, None, None);
    if !shape.log_concave {
        return Err(constraint(format!(
            "log-concavity violated: min second difference of ln f = {:e}",
            shape.min_second_difference_of_log
        )));
    }
    if !shape.symmetric {
        return Err(constraint(format!("symmetry violated: max asymmetry {:e}", shape.max_asymmetry)));
    }
    let var = variance(&f);
    if (var - 1.0).abs() > 1e-6 {
        return Err(constraint(format!("variance {var} differs from 1 by more than 1e-6")));
    }
    let ex4 = moment(&f, 4);
    if nontrivial && ex4 >= 3.0 {
        return Err(constraint(format!("E X^4 = {ex4} must be below 3")));
    }
    Ok(f)
}

/// `f = phi + delta` on `grid`, validated against every admissibility
/// constraint. The strict fourth-moment conditions apply only to a nonzero
/// `delta`.
pub fn build_f(pert: &AdmissiblePerturbation, grid: &Grid) -> Result<GridDensity> {
    let delta = pert.realized(grid)?;
    build_from_values(grid, &delta.values)
}

/// Largest `epsilon <= eps_max` for which [`build_f`] succeeds, halved for
/// safety; `eps_max` itself if it is feasible.
pub fn epsilon_search(template: &AdmissiblePerturbation, grid: &Grid, eps_max: f64) -> Result<f64> {
    if !(eps_max >= MIN_EPS) {
        return Err(Error::Infeasible(format!("eps_max = {eps_max} is below the minimum {MIN_EPS}")));
    }
    let shape = template.shape(grid)?;
    let unit = grid.sample(|x| shape.eval(x));
    let feasible = |eps: f64| {
        let delta: Vec<f64> = unit.iter().map(|u| eps * u).collect();
        build_from_values(grid, &delta)
    };
    if let Err(e) = feasible(MIN_EPS) {
        return Err(Error::Infeasible(format!("epsilon = {MIN_EPS} already fails: {e}")));
    }
    if feasible(eps_max).is_ok() {
        return Ok(eps_max);
    }
    let (mut lo, mut hi) = (MIN_EPS.ln(), eps_max.ln());
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid.exp()).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * lo.exp())
}

/// The validated counterexample density and its key functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub perturbation: AdmissiblePerturbation,
    pub density: GridDensity,
    /// `J` of the tilted shape `g_tilde + kappa w`.
    pub j: JResult,
    pub ex4_minus_3: f64,
    /// `int (f * phi)'''' ln (f * phi)`.
    pub k: f64,
}

/// Runs the full construction on `grid`:
///
/// 1. `epsilon` from [`epsilon_search`] with the probe tilt;
/// 2. `kappa` so that `E X^4 - 3 = -8 epsilon^2 J(g_tilde)`, which keeps
///    `(E X^4 - 3) / 16` below half of `epsilon^2 J` in the expansion
///    `K = (E X^4 - 3) / 16 + epsilon^2 J + ...` and hence `K > 0`;
/// 3. `kappa` halved until [`build_f`] accepts.
pub fn construct(grid: &Grid, eta: f64) -> Result<Counterexample> {
    let template = AdmissiblePerturbation::new(PerturbationG::explicit(), eta, PROBE_KAPPA, 0.0)?;
    let epsilon = epsilon_search(&template, grid, DEFAULT_EPS_MAX)?;
    let untilted = AdmissiblePerturbation::new(PerturbationG::explicit(), eta, 0.0, epsilon)?;
    let shape = untilted.shape(grid)?;
    let j0 = compute_j(&shape, DEFAULT_J_STEP)?;
    let target = 8.0 * epsilon * j0.j_combined + shape.g_fourth_moment;
    if target <= 0.0 || shape.w_fourth_moment >= 0.0 {
        return Err(Error::Infeasible(format!(
            "no positive tilt: int g x^4 = {:e}, int w x^4 = {:e}",
            shape.g_fourth_moment, shape.w_fourth_moment
        )));
    }
    let mut kappa = PROBE_KAPPA.min(target / shape.w_fourth_moment.abs());
    let mut last_err = None;
    for _ in 0..20 {
        let pert = AdmissiblePerturbation::new(PerturbationG::explicit(), eta, kappa, epsilon)?;
        match build_f(&pert, grid) {
            Ok(density) => {
                let j = compute_j(&pert.shape(grid)?, DEFAULT_J_STEP)?;
                let ex4_minus_3 = moment(&density, 4) - 3.0;
                let k = k_functional(&density);
                return Ok(Counterexample { perturbation: pert, density, j, ex4_minus_3, k });
            }
            Err(e) => {
                last_err = Some(e);
                kappa *= 0.5;
            }
        }
    }
    Err(Error::Infeasible(format!("no admissible tilt: {}", last_err.map(|e| e.to_string()).unwrap_or_default())))
}

/// One evaluation of the moment generating function bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfEntry {
    pub t: f64,
    pub log_mgf: f64,
    /// `16 t^2`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfReport {
    pub entries: Vec<MgfEntry>,
    /// `max_t E e^{tX} / e^{16 t^2}`.
    pub max_ratio: f64,
}

/// Verifies `E e^{tX} <= e^{16 t^2}` for each `t` in `t_grid`.
pub fn mgf_bound_check(d: &GridDensity, t_grid: &[f64]) -> Result<MgfReport> {
    let grid = d.grid();
    let v = d.values();
    let mut entries = Vec::with_capacity(t_grid.len());
    let mut max_ratio = 0.0f64;
    for &t in t_grid {
        if t == 0.0 || t.abs() > 4.0 || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("t must lie in [-4, 4] without 0, got {t}")));
        }
        let mgf = trapezoid_by(v.len(), grid.dx(), |i| v[i] * (t * grid.x(i)).exp());
        let entry = MgfEntry { t, log_mgf: mgf.ln(), bound: 16.0 * t * t };
        if entry.log_mgf > entry.bound {
            return Err(Error::MgfBound { t, log_mgf: entry.log_mgf, bound: entry.bound });
        }
        max_ratio = max_ratio.max((entry.log_mgf - entry.bound).exp());
        entries.push(entry);
    }
    Ok(MgfReport { entries, max_ratio })
}
