use serde::{Deserialize, Serialize};

use super::knn::knn_entropy_points;
use super::matrix::fourier_matrix;
use super::sampling::SampleBatch;
use crate::error::{Error, Result};

/// Entropy estimate (nats, real embedding) with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// k-NN entropy of a complex batch embedded in `R^{2n}`.
pub fn knn_entropy(batch: &SampleBatch, k: usize) -> Result<Estimate> {
    let (value, se) = knn_entropy_points(&batch.real_embedding(), 2 * batch.n, k)?;
    Ok(Estimate { value, se })
}

/// Entropy of a complex-unconditional batch through its log-moduli.
///
/// Phases of such a vector are uniform and independent of the moduli, and
/// with `T_j = ln |X_j|^2` the change of variables gives
/// `h(X) = h(T) + E[T_1 + ... + T_n] + n ln pi`. Only `h(T)` is estimated by
/// nearest neighbours, in `n` instead of `2n` dimensions.
pub fn polar_entropy(batch: &SampleBatch, k: usize) -> Result<Estimate> {
    let n = batch.n;
    let t: Vec<f64> = batch.points.iter().map(|z| z.norm_sqr().ln()).collect();
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateBatch("a coordinate is exactly zero".into()));
    }
    let (h_t, se) = knn_entropy_points(&t, n, k)?;
    let mean_sum = t.iter().sum::<f64>() / batch.m as f64;
    // standard error of the mean of sum_j T_j
    let sums: Vec<f64> = t.chunks(n).map(|c| c.iter().sum()).collect();
    let var = sums.iter().map(|s| (s - mean_sum).powi(2)).sum::<f64>() / (batch.m as f64 - 1.0);
    let se_mean = (var / batch.m as f64).sqrt();
    Ok(Estimate {
        value: h_t + mean_sum + n as f64 * std::f64::consts::PI.ln(),
        se: (se * se + se_mean * se_mean).sqrt(),
    })
}

/// Monte Carlo check of `(1/n) h(X) <= h((X_1 + ... + X_n) / sqrt(n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub n: usize,
    pub m: usize,
    pub kind: String,
    /// `(1/n) h(X)`.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `h((X_1 + ... + X_n) / sqrt(n))`.
    pub rhs: f64,
    pub rhs_se: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    /// Combined standard error of the margin.
    pub margin_se: f64,
    /// Direct k-NN estimate of the right side in the real embedding, for
    /// reference.
    pub rhs_raw: f64,
    pub rhs_raw_se: f64,
}

impl Theorem2Report {
    /// `margin >= -sigmas * margin_se`.
    pub fn holds(&self, sigmas: f64) -> bool {
        self.margin >= -sigmas * self.margin_se
    }

    /// `|margin| <= sigmas * margin_se`.
    pub fn equality_within(&self, sigmas: f64) -> bool {
        self.margin.abs() <= sigmas * self.margin_se
    }
}

/// Estimates both sides of the inequality for a complex-unconditional batch
/// (`n >= 2`), using [`polar_entropy`] for the reported margin.
pub fn theorem2_check(batch: &SampleBatch, k: usize) -> Result<Theorem2Report> {
    let n = batch.n;
    if n < 2 {
        return Err(Error::InvalidArgument("the inequality needs n >= 2".into()));
    }
    let nf = n as f64;
    let sum = batch.normalized_sum();
    let joint = polar_entropy(batch, k)?;
    let single = polar_entropy(&sum, k)?;
    let single_raw = knn_entropy(&sum, k)?;

    let (lhs, lhs_se) = (joint.value / nf, joint.se / nf);
    let margin = single.value - lhs;
    Ok(Theorem2Report {
        n,
        m: batch.m,
        kind: batch.sampler_id.clone(),
        lhs,
        lhs_se,
        rhs: single.value,
        rhs_se: single.se,
        margin,
        margin_se: (lhs_se * lhs_se + single.se * single.se).sqrt(),
        rhs_raw: single_raw.value,
        rhs_raw_se: single_raw.se,
    })
}

/// The subadditivity step behind the inequality: `h(UX) <= sum_j h((UX)_j)`
/// for the Fourier matrix `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierChain {
    /// Direct k-NN estimate of `h(UX)` in the real embedding.
    pub h_ux: f64,
    pub h_ux_se: f64,
    pub sum_coordinates: f64,
    pub sum_coordinates_se: f64,
}

impl FourierChain {
    pub fn holds(&self, sigmas: f64) -> bool {
        let se = (self.h_ux_se.powi(2) + self.sum_coordinates_se.powi(2)).sqrt();
        self.h_ux <= self.sum_coordinates + sigmas * se
    }
}

/// Estimates both sides of the subadditivity step. The joint term is a
/// `2n`-dimensional k-NN estimate and dominates the cost for `n >= 4`.
pub fn fourier_chain(batch: &SampleBatch, k: usize) -> Result<FourierChain> {
    let n = batch.n;
    let ux = batch.transformed(&fourier_matrix(n)?)?;
    let h_ux = knn_entropy(&ux, k)?;
    let coords = (0..n).map(|j| polar_entropy(&ux.coordinate(j), k)).collect::<Result<Vec<_>>>()?;
    Ok(FourierChain {
        h_ux: h_ux.value,
        h_ux_se: h_ux.se,
        sum_coordinates: coords.iter().map(|e| e.value).sum(),
        sum_coordinates_se: coords.iter().map(|e| e.se * e.se).sum::<f64>().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::sampling::{sample_complex_unconditional, SamplerKind};
    use std::f64::consts::{E, PI};

    #[test]
    fn polar_entropy_of_complex_gaussian() {
        let b = sample_complex_unconditional(SamplerKind::IidComplexGaussian, 2, 20_000, 5).unwrap();
        let est = polar_entropy(&b, 4).unwrap();
        // CN(0, 1) has entropy ln(pi e) per coordinate
        let exact = 2.0 * (PI * E).ln();
        assert!((est.value - exact).abs() < 4.0 * est.se + 0.01, "{est:?} vs {exact}");
        let raw = knn_entropy(&b, 4).unwrap();
        assert!((raw.value - exact).abs() < 4.0 * raw.se + 0.05, "{raw:?}");
    }

    #[test]
    fn mixed_scale_gap_matches_am_gm() {
        let b = sample_complex_unconditional(SamplerKind::IndependentComplexGaussianMixedScales, 2, 40_000, 6)
            .unwrap();
        let r = theorem2_check(&b, 4).unwrap();
        let v = SamplerKind::mixed_scales(2);
        let mean = v.iter().sum::<f64>() / 2.0;
        let exact = mean.ln() - 0.5 * v.iter().map(|x| x.ln()).sum::<f64>();
        assert!((r.margin - exact).abs() < 4.0 * r.margin_se + 0.01, "{} vs {exact}", r.margin);
        assert!(r.holds(3.0));
    }

    #[test]
    fn iid_gaussian_is_an_equality_case() {
        let b = sample_complex_unconditional(SamplerKind::IidComplexGaussian, 3, 20_000, 7).unwrap();
        let r = theorem2_check(&b, 4).unwrap();
        assert!(r.equality_within(4.0), "{r:?}");
        let chain = fourier_chain(&b, 4).unwrap();
        assert!(chain.holds(3.0), "{chain:?}");
    }

    #[test]
    fn single_coordinate_rejected() {
        let b = sample_complex_unconditional(SamplerKind::IidComplexGaussian, 1, 2000, 1).unwrap();
        assert!(matches!(theorem2_check(&b, 4), Err(Error::InvalidArgument(_))));
    }
}
