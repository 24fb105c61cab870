//! Numerical verification of generalized entropy power inequalities.
//!
//! The crate is organized by subsystem:
//!
//! * [`density`]: grid densities, entropy, FFT convolution, moments and
//!   shape diagnostics;
//! * [`edgeworth`]: Hermite polynomials and the Edgeworth approximation of
//!   normalized i.i.d. sums;
//! * [`counterexample`]: the log-concave perturbation of the Gaussian that
//!   breaks Schur-concavity of weighted-sum entropy, with the kernel
//!   integral `J` and the entropy-gap experiment;
//! * [`schur`]: majorization and the weighted-sum entropy functions;
//! * [`hadamard`]: Fourier and Sylvester matrices, complex-unconditional
//!   samplers, the nearest-neighbour entropy estimator and the Monte Carlo
//!   check of `(1/n) h(X) <= h((X_1 + ... + X_n) / sqrt n)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexample;
pub mod density;
pub mod edgeworth;
pub mod error;
pub mod hadamard;
pub mod numeric;
pub mod quadrature;
pub mod schur;

pub use density::{Grid, GridDensity, ShapeReport};
pub use error::{Error, Result};
