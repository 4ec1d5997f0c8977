//! Signal models, forward operators, estimators, and Gibbs samplers for
//! benchmarking reconstruction methods on 1D linear inverse problems.
//!
//! Ground-truth signals are sampled Lévy processes: cumulative sums of
//! i.i.d. increments drawn from an infinitely divisible law (Gaussian,
//! Laplace, Bernoulli-Laplace, or Student's t). Measurements follow
//! `y = H s + n` for a deconvolution or Fourier-sampling operator `H`
//! under white Gaussian noise. The crate provides
//!
//! - seeded, splittable random streams and the scalar samplers behind
//!   every stochastic component ([`rng`]);
//! - signal synthesis and the discrete prior model `u = D s` ([`process`]);
//! - operator construction, SNR calibration, measurement simulation, and
//!   dataset generation ([`forward`]);
//! - quadratic, total-variation, and log-penalty estimators with
//!   validation-based hyperparameter tuning ([`variational`]);
//! - posterior-mean (MMSE) estimation by Gibbs sampling for Laplace,
//!   Student's t, and Bernoulli-Laplace increments ([`gibbs`]).
//!
//! The crate is `no_std` (with `alloc`) and clock-free; IO, file formats,
//! timing, parallel orchestration, and the command-line front end live in
//! the companion `sspbench` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod forward;
pub mod gibbs;
pub mod linalg;
mod math;
#[cfg(feature = "oracles")]
pub mod oracles;
pub mod process;
pub mod rng;
pub mod variational;

pub use error::{CoreError, Result};
