//! Recursive marginal quantization of one-dimensional Euler schemes.
//!
//! The library discretizes a diffusion `dX_t = b(t, X_t) dt + σ(t, X_t) dW_t`
//! with the Euler scheme on a uniform time mesh and quantizes each marginal
//! in sequence: the one-step conditional law given the previous quantized
//! value is a finite Gaussian mixture, whose quadratic distortion is
//! minimized by a safeguarded Newton-Raphson iteration with closed-form
//! gradient and tridiagonal Hessian. The output is a quantization tree: per
//! level, an optimal grid, the marginal weights, and the transition matrix
//! of the resulting Markov chain — enough to price European payoffs by a
//! finite sum, with a seeded Monte Carlo pricer as baseline and a-priori
//! error bounds with optimal grid-size allocation across levels.
//!
//! The crate is `no_std` (with `alloc`); everything involving files, CLI, or
//! serialization lives in the companion `rmq-cli` crate.
//!
//! Modules mirror the pipeline:
//!
//! * [`gaussian`] — standard-normal pdf/cdf/quantile, absolute moments, and
//!   the optimal quantizer of N(0,1) (baseline and warm-start seed);
//! * [`model`] — diffusion coefficients and one-step Euler parameters;
//! * [`distortion`] — mixture distortion, gradient, tridiagonal Hessian,
//!   and the safeguarded Newton solver;
//! * [`tree`] — the level-by-level recursion, transition matrices, weight
//!   propagation, and grid-size dispatching;
//! * [`bounds`] — the a-priori error-bound constants and the cumulative
//!   bound driving optimal dispatching;
//! * [`pricing`] — European payoff evaluation on the terminal grid plus the
//!   Black-Scholes closed form;
//! * [`mc`] — reproducible Euler-scheme Monte Carlo with substream-per-path
//!   random numbers.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod distortion;
mod error;
pub mod gaussian;
pub mod mc;
pub mod model;
pub mod pricing;
pub mod tree;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
