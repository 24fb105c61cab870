//! The log-concave perturbation of the Gaussian whose i.i.d. normalized sums
//! break Schur-concavity of `a -> h(sum sqrt(a_i) X_i)`.
//!
//! Pipeline: the piecewise cubic `g` ([`PerturbationG`]) is mollified,
//! projected back to `int = int x^2 = 0`, tilted to make the fourth moment
//! negative and scaled by a small `epsilon` ([`AdmissiblePerturbation`]);
//! [`build_f`] validates `f = phi + delta`. The sign of the entropy gap is
//! governed by [`k_functional`] and the double integral computed by
//! [`compute_j`].

mod construction;
mod gap;
mod kernels;

pub use construction::{
    bump_pair, build_f, construct, epsilon_search, mgf_bound_check, mollified_g,
    AdmissiblePerturbation, Counterexample, MgfEntry, MgfReport, PerturbationShape,
    DEFAULT_EPS_MAX, DEFAULT_ETA, MIN_EPS, PROBE_KAPPA,
};
pub use gap::{entropy_gap_experiment, k_functional, CounterexampleSummary, GapRow, GapTable};
pub use kernels::{
    bracket_j1, bracket_j2, bracket_merged, compute_j, gaussian_factor, kernel_identity_check,
    JResult, KernelResiduals, DEFAULT_J_STEP,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A real function vanishing outside finitely many intervals and smooth on
/// each of them.
pub trait SignedFunction: Sync {
    fn eval(&self, s: f64) -> f64;
    /// Disjoint closed intervals covering the support.
    fn pieces(&self) -> Vec<(f64, f64)>;
}

/// The even piecewise cubic `c_3 |s|^3 + c_2 s^2 + c_1 |s| + c_0` on
/// `1 <= |s| <= 2`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationG {
    /// `(numerator, denominator)` of `c_3, c_2, c_1, c_0`.
    coeffs: [(i64, i64); 4],
}

const EXPLICIT_COEFFS: [(i64, i64); 4] = [(7280, 69), (-11025, 23), (49000, 69), (-7875, 23)];

impl PerturbationG {
    /// The explicit `g` with `int g = int g s^2 = int g s^4 = 0`.
    pub fn explicit() -> Self {
        Self { coeffs: EXPLICIT_COEFFS }
    }

    /// `g = 0`, the unperturbed Gaussian.
    pub fn zero() -> Self {
        Self { coeffs: [(0, 1); 4] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.0 == 0)
    }

    /// Exact coefficients `c_3, c_2, c_1, c_0`.
    pub fn coeffs_exact(&self) -> [BigRational; 4] {
        self.coeffs.map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.coeffs.map(|(p, q)| p as f64 / q as f64)
    }

    /// `int s^k g(s) ds` in exact arithmetic (zero for odd `k`).
    pub fn moment_exact(&self, k: u32) -> BigRational {
        if k % 2 == 1 {
            return BigRational::zero();
        }
        // 2 int_1^2 c_p s^(p+k) ds = 2 c_p (2^(p+k+1) - 1) / (p+k+1)
        let mut total = BigRational::zero();
        for (c, p) in self.coeffs_exact().into_iter().zip([3u32, 2, 1, 0]) {
            let e = p + k + 1;
            let pow = (BigInt::from(1) << e as usize) - BigInt::from(1);
            total += c * BigRational::new(pow, BigInt::from(e));
        }
        total * BigRational::from_integer(BigInt::from(2))
    }

    /// Floating-point value of [`moment_exact`](Self::moment_exact).
    pub fn moment(&self, k: u32) -> f64 {
        self.moment_exact(k).to_f64().unwrap_or(f64::NAN)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let a = s.abs();
        if !(1.0..=2.0).contains(&a) {
            return 0.0;
        }
        let [c3, c2, c1, c0] = self.coeffs();
        ((c3 * a + c2) * a + c1) * a + c0
    }
}

impl SignedFunction for PerturbationG {
    fn eval(&self, s: f64) -> f64 {
        PerturbationG::eval(self, s)
    }

    fn pieces(&self) -> Vec<(f64, f64)> {
        if self.is_zero() {
            Vec::new()
        } else {
            vec![(-2.0, -1.0), (1.0, 2.0)]
        }
    }
}

/// `g(s)` for the explicit perturbation.
pub fn g_eval(s: f64) -> f64 {
    let a = s.abs();
    if !(1.0..=2.0).contains(&a) {
        return 0.0;
    }
    let c = EXPLICIT_COEFFS.map(|(p, q)| p as f64 / q as f64);
    ((c[0] * a + c[1]) * a + c[2]) * a + c[3]
}

/// `(int g, int g s^2, int g s^4)` in exact rational arithmetic.
pub fn g_moments_exact() -> (BigRational, BigRational, BigRational) {
    let g = PerturbationG::explicit();
    (g.moment_exact(0), g.moment_exact(2), g.moment_exact(4))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn g_values() {
        assert_eq!(g_eval(0.5), 0.0);
        assert_eq!(g_eval(2.5), 0.0);
        assert!((g_eval(1.0) + 140.0 / 23.0).abs() < 1e-12);
        assert!((g_eval(1.5) - 35.0 / 92.0).abs() < 1e-12);
        assert!((g_eval(2.0) - 105.0 / 23.0).abs() < 1e-12);
        for &s in &[1.0, 1.2, 1.77, 2.0] {
            assert_eq!(g_eval(s), g_eval(-s));
        }
    }

    #[test]
    fn moments_vanish_exactly() {
        let (m0, m2, m4) = g_moments_exact();
        assert!(m0.is_zero() && m2.is_zero() && m4.is_zero());
        let g = PerturbationG::explicit();
        assert_eq!(g.moment_exact(6), rat(2, 1));
        assert_eq!(g.moment_exact(8), rat(4900, 253));
        assert!(g.moment_exact(3).is_zero());
    }

    #[test]
    fn method_and_free_function_agree() {
        let g = PerturbationG::explicit();
        for i in 0..=60 {
            let s = -3.0 + 0.1 * i as f64;
            assert_eq!(g.eval(s), g_eval(s));
        }
        assert!(PerturbationG::zero().pieces().is_empty());
    }
}
