//! Hadamard matrices, complex-unconditional vectors and the entropy
//! inequality `(1/n) h(X) <= h((X_1 + ... + X_n) / sqrt(n))`.

mod knn;
mod matrix;
mod sampling;
mod inequality;
mod two_copy;

pub use knn::{knn_entropy_points, DEFAULT_K, JACKKNIFE_BLOCKS, MIN_SAMPLES};
pub use matrix::{fourier_matrix, is_complex_hadamard, sylvester_hadamard, UnitaryMatrix, UNITARY_TOL};
pub use sampling::{sample_complex_unconditional, SampleBatch, SamplerKind};
pub use inequality::{fourier_chain, knn_entropy, polar_entropy, theorem2_check, Estimate, FourierChain, Theorem2Report};
pub use two_copy::{two_copy_identity_check, TwoCopyReport};
