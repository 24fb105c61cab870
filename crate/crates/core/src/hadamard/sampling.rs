use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::UnitaryMatrix;
use crate::error::{Error, Result};

/// Families of complex-unconditional random vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// I.i.d. standard complex Gaussians `CN(0, 1)`.
    IidComplexGaussian,
    /// Independent `CN(0, v_j)` with `v_j = 1/2 + j/(n-1)`.
    IndependentComplexGaussianMixedScales,
    /// `X_j = R e^{i theta_j}`: one radius `R = sqrt(Exp(1))`, i.i.d.
    /// uniform phases.
    SharedRadiusPhases,
    /// `X_j = sqrt(W) G_j` with `G_j` i.i.d. `CN(0, 1)` and one log-normal
    /// `W = exp(Z / 2)`.
    CoordinateExchangeableModulus,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::IidComplexGaussian,
        SamplerKind::IndependentComplexGaussianMixedScales,
        SamplerKind::SharedRadiusPhases,
        SamplerKind::CoordinateExchangeableModulus,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::IidComplexGaussian => "iid_complex_gaussian",
            SamplerKind::IndependentComplexGaussianMixedScales => "independent_complex_gaussian_mixed_scales",
            SamplerKind::SharedRadiusPhases => "shared_radius_phases",
            SamplerKind::CoordinateExchangeableModulus => "coordinate_exchangeable_modulus",
        }
    }

    /// Variances `v_j` of the mixed-scale family.
    pub fn mixed_scales(n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![1.0];
        }
        (0..n).map(|j| 0.5 + j as f64 / (n - 1) as f64).collect()
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownSampler(s.to_string()))
    }
}

/// `m` samples of a complex random vector of dimension `n`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub n: usize,
    pub m: usize,
    pub points: Vec<Complex64>,
    pub sampler_id: String,
    pub seed: u64,
}

impl SampleBatch {
    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    /// Coordinates interleaved as `(re_1, im_1, re_2, im_2, ...)`.
    pub fn real_embedding(&self) -> Vec<f64> {
        self.points.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    /// The batch of `(X_1 + ... + X_n) / sqrt(n)`.
    pub fn normalized_sum(&self) -> SampleBatch {
        let s = 1.0 / (self.n as f64).sqrt();
        let points = (0..self.m).map(|i| self.point(i).iter().sum::<Complex64>() * s).collect();
        SampleBatch { n: 1, m: self.m, points, sampler_id: format!("{}:sum", self.sampler_id), seed: self.seed }
    }

    /// Coordinate `j` as a one-dimensional batch.
    pub fn coordinate(&self, j: usize) -> SampleBatch {
        let points = (0..self.m).map(|i| self.point(i)[j]).collect();
        SampleBatch { n: 1, m: self.m, points, sampler_id: format!("{}:{j}", self.sampler_id), seed: self.seed }
    }

    /// `U X` for every sample.
    pub fn transformed(&self, u: &UnitaryMatrix) -> Result<SampleBatch> {
        if u.n() != self.n {
            return Err(Error::LengthMismatch(u.n(), self.n));
        }
        let points = (0..self.m).flat_map(|i| u.apply(self.point(i))).collect();
        Ok(SampleBatch { n: self.n, m: self.m, points, sampler_id: format!("{}:U", self.sampler_id), seed: self.seed })
    }

    /// Multiplies coordinate `j` by `z[j]` in every sample.
    pub fn rotated(&self, z: &[Complex64]) -> Result<SampleBatch> {
        if z.len() != self.n {
            return Err(Error::LengthMismatch(z.len(), self.n));
        }
        let points = self.points.iter().enumerate().map(|(k, p)| p * z[k % self.n]).collect();
        Ok(SampleBatch { n: self.n, m: self.m, points, sampler_id: format!("{}:rot", self.sampler_id), seed: self.seed })
    }

    /// One row per sample with columns `re_1,im_1,...,re_n,im_n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.n).flat_map(|j| [format!("re_{j}"), format!("im_{j}")]).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.m {
            let row: Vec<String> = self.point(i).iter().flat_map(|z| [format!("{:.16e}", z.re), format!("{:.16e}", z.im)]).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

fn phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Draws `m` samples of dimension `n` from `kind`, reproducibly from `seed`.
pub fn sample_complex_unconditional(kind: SamplerKind, n: usize, m: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("dimension and sample count must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scales = SamplerKind::mixed_scales(n);
    let mut points = Vec::with_capacity(n * m);
    for _ in 0..m {
        match kind {
            SamplerKind::IidComplexGaussian => points.extend((0..n).map(|_| complex_normal(&mut rng, 1.0))),
            SamplerKind::IndependentComplexGaussianMixedScales => {
                points.extend(scales.iter().map(|&v| complex_normal(&mut rng, v)))
            }
            SamplerKind::SharedRadiusPhases => {
                let e: f64 = Exp1.sample(&mut rng);
                let r = e.sqrt();
                points.extend((0..n).map(|_| phase(&mut rng) * r));
            }
            SamplerKind::CoordinateExchangeableModulus => {
                let z: f64 = StandardNormal.sample(&mut rng);
                let w = (0.5 * z).exp();
                points.extend((0..n).map(|_| complex_normal(&mut rng, w)));
            }
        }
    }
    Ok(SampleBatch { n, m, points, sampler_id: kind.as_str().to_string(), seed })
}
