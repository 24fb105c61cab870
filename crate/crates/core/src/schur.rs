//! Majorization on the simplex and the weighted-sum entropies
//! `Phi(a) = h(sum sqrt(a_i) X_i)` and `Xi(a) = h(sum a_i X_i)` for i.i.d.
//! `X_i`.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{convolve, entropy, scale_rv, GridDensity};
use crate::error::{Error, Result};

/// Tolerance on `sum a_i = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Entropy margin below which a pair counts as a Schur-concavity violation.
pub const SCHUR_TOL: f64 = 5e-4;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("weight vector is empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("weights must be finite and nonnegative, got {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Divides by the sum.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("weights must have a positive sum".into()));
        }
        Self::new(raw.iter().map(|w| w / total).collect())
    }

    /// `(1/n, ..., 1/n)`.
    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0 / n as f64; n.max(1)] }
    }

    /// `(1, 0, ..., 0)`.
    pub fn vertex(n: usize) -> Self {
        let mut weights = vec![0.0; n.max(1)];
        weights[0] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn sorted_desc(&self) -> Vec<f64> {
        let mut w = self.weights.clone();
        w.sort_by(|x, y| y.total_cmp(x));
        w
    }
}

/// `a` is majorized by `b` (`a ≺ b`): every partial sum of the decreasing
/// rearrangement of `a` is at most that of `b`.
pub fn majorizes(a: &WeightVector, b: &WeightVector) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let (sa, sb) = (a.sorted_desc(), b.sorted_desc());
    let (mut pa, mut pb) = (0.0, 0.0);
    for (x, y) in sa.iter().zip(&sb) {
        pa += x;
        pb += y;
        if pa > pb + SIMPLEX_TOL {
            return Ok(false);
        }
    }
    Ok((pa - pb).abs() <= SIMPLEX_TOL)
}

/// Entropy of `sum c_i X_i` for i.i.d. `X_i ~ d`, skipping zero
/// coefficients. Coefficients are sorted first so the result does not
/// depend on their order.
fn weighted_sum_entropy(coeffs: &mut [f64], d: &GridDensity) -> Result<f64> {
    coeffs.sort_by(|x, y| y.total_cmp(x));
    let mut acc: Option<GridDensity> = None;
    for &c in coeffs.iter().filter(|c| **c > 0.0) {
        let scaled = scale_rv(d, c)?;
        acc = Some(match acc {
            None => scaled,
            Some(s) => convolve(&s, &scaled)?,
        });
    }
    acc.map(|s| entropy(&s)).ok_or_else(|| Error::InvalidArgument("all weights are zero".into()))
}

/// `Phi(a) = h(sum sqrt(a_i) X_i)`.
pub fn phi(a: &WeightVector, d: &GridDensity) -> Result<f64> {
    let mut c: Vec<f64> = a.weights.iter().map(|w| w.sqrt()).collect();
    weighted_sum_entropy(&mut c, d)
}

/// `Xi(a) = h(sum a_i X_i)`.
pub fn xi(a: &WeightVector, d: &GridDensity) -> Result<f64> {
    let mut c = a.weights.clone();
    weighted_sum_entropy(&mut c, d)
}

/// Random pair `a ≺ b`: `b` uniform on the simplex, `a` a random convex
/// combination of coordinate permutations of `b`.
pub fn sample_comparable_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (WeightVector, WeightVector) {
    let dirichlet = |rng: &mut R, k: usize| {
        let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x: f64| x / s).collect::<Vec<f64>>()
    };
    let b = dirichlet(rng, n);
    let lambda = dirichlet(rng, n);
    let mut a = vec![0.0; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for &l in &lambda {
        perm.shuffle(rng);
        for (i, &p) in perm.iter().enumerate() {
            a[i] += l * b[p];
        }
    }
    // renormalize away the rounding drift
    (
        WeightVector::normalized(&a).expect("positive weights"),
        WeightVector::normalized(&b).expect("positive weights"),
    )
}

/// One evaluated pair of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub phi_a: f64,
    pub phi_b: f64,
    /// `Phi(a) - Phi(b)`; Schur-concavity requires it to be nonnegative.
    pub margin: f64,
}

impl ScanEntry {
    pub fn is_violation(&self, tol: f64) -> bool {
        self.margin < -tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurScan {
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub entries: Vec<ScanEntry>,
}

impl SchurScan {
    pub fn violations(&self) -> Vec<&ScanEntry> {
        self.entries.iter().filter(|e| e.is_violation(self.tol)).collect()
    }

    /// CSV `a,b,phi_a,phi_b,margin`; vector components are joined by `;`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "a,b,phi_a,phi_b,margin")?;
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(";");
        for e in &self.entries {
            writeln!(out, "{},{},{:.16e},{:.16e},{:.16e}", join(&e.a), join(&e.b), e.phi_a, e.phi_b, e.margin)?;
        }
        Ok(())
    }
}

/// The structured pair `(1, 1/n, ..., 1/n) ≺ (1, 1/(n-1), ..., 1/(n-1), 0)`,
/// each normalized, in dimension `n + 1`.
pub fn clt_pair(n: usize) -> Result<(WeightVector, WeightVector)> {
    if n < 2 {
        return Err(Error::InvalidArgument("clt_pair needs n >= 2".into()));
    }
    let mut a = vec![1.0 / n as f64; n + 1];
    a[0] = 1.0;
    let mut b = vec![1.0 / (n - 1) as f64; n + 1];
    b[0] = 1.0;
    b[n] = 0.0;
    Ok((WeightVector::normalized(&a)?, WeightVector::normalized(&b)?))
}

/// Evaluates `Phi` on `pairs` random comparable pairs in dimension `n`
/// (plus the structured [`clt_pair`] when `n >= 3`). Pair `i` draws from its
/// own ChaCha stream, so results do not depend on scheduling.
pub fn schur_violation_scan(d: &GridDensity, n: usize, pairs: usize, seed: u64) -> Result<SchurScan> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!("dimension must be in 2..=8, got {n}")));
    }
    if pairs > 10_000 {
        return Err(Error::InvalidArgument(format!("at most 10000 pairs, got {pairs}")));
    }
    let mut candidates = Vec::with_capacity(pairs + 1);
    if n >= 3 {
        candidates.push(clt_pair(n - 1)?);
    }
    candidates.extend((0..pairs).map(|i| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        sample_comparable_pair(n, &mut rng)
    }));
    let entries = candidates
        .into_par_iter()
        .map(|(a, b)| {
            let phi_a = phi(&a, d)?;
            let phi_b = phi(&b, d)?;
            Ok(ScanEntry { a: a.weights, b: b.weights, phi_a, phi_b, margin: phi_a - phi_b })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SchurScan { n, seed, tol: SCHUR_TOL, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Grid;

    #[test]
    fn majorization_examples() {
        let a = WeightVector::new(vec![0.4, 0.35, 0.25]).unwrap();
        let b = WeightVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert!(majorizes(&a, &b).unwrap());
        assert!(!majorizes(&b, &a).unwrap());
        assert!(majorizes(&WeightVector::uniform(3), &b).unwrap());
        assert!(majorizes(&b, &WeightVector::vertex(3)).unwrap());
        assert!(matches!(majorizes(&a, &WeightVector::uniform(2)), Err(Error::LengthMismatch(3, 2))));
    }

    #[test]
    fn simplex_validation() {
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![-0.1, 1.1]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn sampled_pairs_are_comparable() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for n in 2..=8 {
            for _ in 0..50 {
                let (a, b) = sample_comparable_pair(n, &mut rng);
                assert!(majorizes(&a, &b).unwrap());
            }
        }
        let (a, b) = clt_pair(4).unwrap();
        assert!(majorizes(&a, &b).unwrap());
    }

    #[test]
    fn single_summand_gives_the_entropy() {
        let d = GridDensity::gaussian_mixture(&[(0.5, -1.0, 0.3), (0.5, 1.0, 0.3)], Grid::new(-8.0, 8.0, 4001).unwrap())
            .unwrap();
        let e = entropy(&d);
        assert!((phi(&WeightVector::vertex(3), &d).unwrap() - e).abs() < 1e-12);
        assert!((xi(&WeightVector::vertex(3), &d).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn gaussian_xi_at_the_midpoint() {
        let d = GridDensity::gaussian(0.0, 1.0, Grid::new(-12.0, 12.0, 4801).unwrap()).unwrap();
        let h = xi(&WeightVector::uniform(2), &d).unwrap();
        let want = 0.5 * (std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((h - want).abs() < 1e-5, "{h} vs {want}");
    }

    #[test]
    fn scan_rejects_bad_sizes() {
        let d = GridDensity::gaussian(0.0, 1.0, Grid::new(-10.0, 10.0, 1001).unwrap()).unwrap();
        assert!(schur_violation_scan(&d, 9, 1, 0).is_err());
        assert!(schur_violation_scan(&d, 3, 10_001, 0).is_err());
    }
}
