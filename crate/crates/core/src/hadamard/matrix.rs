use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `||U U^* - I||_max`.
pub const UNITARY_TOL: f64 = 1e-12;

/// Square unitary matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

fn gram_residual(n: usize, entries: &[Complex64], scale: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let dot: Complex64 = (0..n).map(|k| entries[i * n + k] * entries[j * n + k].conj()).sum();
            let target = if i == j { scale } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

impl UnitaryMatrix {
    /// Validates `||U U^* - I||_max <= 1e-12`.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::LengthMismatch(entries.len(), n * n));
        }
        let r = gram_residual(n, &entries, 1.0);
        if r > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!("matrix is not unitary: residual {r:e}")));
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// `||U U^* - I||_max`.
    pub fn unitarity_residual(&self) -> f64 {
        gram_residual(self.n, &self.entries, 1.0)
    }

    /// `U x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.entries.chunks(self.n).map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum()).collect()
    }
}

/// `n^{-1/2} exp(2 pi i j k / n)`, `0 <= j, k < n`.
pub fn fourier_matrix(n: usize) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let entries = (0..n)
        .flat_map(|j| {
            (0..n).map(move |k| {
                // reduce j k mod n before forming the angle
                let angle = 2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                Complex64::from_polar(scale, angle)
            })
        })
        .collect();
    UnitaryMatrix::new(n, entries)
}

/// Sylvester's `+-1` Hadamard matrix of order `2^k`.
pub fn sylvester_hadamard(k: u32) -> Result<Vec<Vec<i64>>> {
    if k > 12 {
        return Err(Error::InvalidArgument(format!("order 2^{k} exceeds the supported 2^12")));
    }
    let mut h = vec![vec![1i64]];
    for _ in 0..k {
        let m = h.len();
        let mut next = vec![vec![0i64; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                let v = h[i][j];
                next[i][j] = v;
                next[i][j + m] = v;
                next[i + m][j] = v;
                next[i + m][j + m] = -v;
            }
        }
        h = next;
    }
    Ok(h)
}

/// All entries share one modulus (within `tol`) and distinct rows are
/// orthogonal (inner products within `tol n`).
pub fn is_complex_hadamard(m: &[Vec<Complex64>], tol: f64) -> bool {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return false;
    }
    let modulus = m[0][0].norm();
    if m.iter().flatten().any(|z| (z.norm() - modulus).abs() > tol) {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            let dot: Complex64 = m[i].iter().zip(&m[j]).map(|(a, b)| a * b.conj()).sum();
            if dot.norm() > tol * n as f64 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn small_fourier_matrices() {
        let f1 = fourier_matrix(1).unwrap();
        assert_eq!(f1.entry(0, 0), c(1.0));
        let f2 = fourier_matrix(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (i, j, v) in [(0, 0, s), (0, 1, s), (1, 0, s), (1, 1, -s)] {
            assert!((f2.entry(i, j) - c(v)).norm() < 1e-15);
        }
        assert!(fourier_matrix(4).unwrap().unitarity_residual() <= 1e-14);
        assert!(fourier_matrix(0).is_err());
    }

    #[test]
    fn sylvester_base_cases() {
        assert_eq!(sylvester_hadamard(0).unwrap(), vec![vec![1]]);
        assert_eq!(sylvester_hadamard(1).unwrap(), vec![vec![1, 1], vec![1, -1]]);
        assert!(sylvester_hadamard(13).is_err());
    }

    #[test]
    fn hadamard_predicate() {
        let scaled: Vec<Vec<Complex64>> =
            fourier_matrix(5).unwrap().rows().into_iter().map(|r| r.into_iter().map(|z| z * 5f64.sqrt()).collect()).collect();
        assert!(is_complex_hadamard(&scaled, 1e-12));
        let id: Vec<Vec<Complex64>> = (0..3).map(|i| (0..3).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect()).collect();
        assert!(!is_complex_hadamard(&id, 1e-12));
        let h4: Vec<Vec<Complex64>> =
            sylvester_hadamard(2).unwrap().into_iter().map(|r| r.into_iter().map(|v| c(v as f64)).collect()).collect();
        assert!(is_complex_hadamard(&h4, 1e-12));
    }

    #[test]
    fn non_unitary_rejected() {
        assert!(UnitaryMatrix::new(2, vec![c(1.0), c(1.0), c(0.0), c(1.0)]).is_err());
    }
}
