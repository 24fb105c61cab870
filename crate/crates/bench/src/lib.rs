//! Shared inputs for the criterion benchmarks.

use epi_lab_core::counterexample::{construct, DEFAULT_ETA};
use epi_lab_core::hadamard::{sample_complex_unconditional, SampleBatch, SamplerKind};
use epi_lab_core::{Grid, GridDensity};

/// Standard normal on the counterexample grid.
pub fn gaussian() -> GridDensity {
    GridDensity::gaussian(0.0, 1.0, Grid::counterexample_default()).expect("grid covers the tails")
}

/// The validated counterexample density.
pub fn counterexample_density() -> GridDensity {
    construct(&Grid::counterexample_default(), DEFAULT_ETA).expect("construction succeeds").density
}

/// A fixed batch of shared-radius vectors.
pub fn batch(n: usize, m: usize) -> SampleBatch {
    sample_complex_unconditional(SamplerKind::SharedRadiusPhases, n, m, 17).expect("valid sampler arguments")
}
