//! Seeded Euler-scheme Monte Carlo pricing — the simulation baseline the
//! quantized prices are compared against.
//!
//! Every path gets its own counter-derived ChaCha stream, so path i's draws
//! do not depend on how many paths run or in what order they are generated.
//! The final reduction is a fixed-shape pairwise sum. Together these make
//! the result bit-identical for a given seed however the path loop is
//! scheduled (serial here; data-parallel in front ends).

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::gaussian::std_normal_inv_cdf;
use crate::model::{euler_params, DiffusionModel};
use crate::pricing::Payoff;
use crate::{Error, Result};

/// 97.5% standard normal quantile: half-width multiplier of a 95% CI.
pub const Z95: f64 = 1.96;

/// A Monte Carlo price with its sampling uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    /// Discounted sample-mean price.
    pub price: f64,
    /// Standard error of the price.
    pub std_error: f64,
    /// price − 1.96·std_error.
    pub ci_low: f64,
    /// price + 1.96·std_error.
    pub ci_high: f64,
    /// Number of simulated paths.
    pub paths: u64,
    /// Seed the run was derived from.
    pub seed: u64,
}

/// Uniform in the open interval (0, 1) from one 64-bit draw (53-bit
/// resolution, offset half a step so 0 and 1 are unreachable).
fn next_open_uniform(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// One standard normal innovation via inverse-cdf sampling.
pub fn next_std_normal(rng: &mut ChaCha12Rng) -> f64 {
    std_normal_inv_cdf(next_open_uniform(rng))
}

/// The RNG for one path: the seed picks the key, the path index picks the
/// stream.
pub fn path_rng(seed: u64, path: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Simulates one Euler path of n steps to the horizon and returns X̄_T.
pub fn terminal_value(
    model: &DiffusionModel,
    x0: f64,
    t_end: f64,
    n: usize,
    rng: &mut ChaCha12Rng,
) -> Result<f64> {
    let dt = t_end / n as f64;
    let mut x = x0;
    for k in 0..n {
        let p = euler_params(model, k as f64 * dt, x, dt)?;
        x = p.mean + p.std * next_std_normal(rng);
    }
    Ok(x)
}

/// Fixed-shape pairwise sum: deterministic, with O(log n) rounding depth.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Discounted mean, standard error, and 95% CI from per-path payoff values.
///
/// Shared by the serial loop below and parallel front ends: feed it the
/// per-path payoffs in path order and the result is identical regardless of
/// how the paths were computed.
pub fn summarize_payoffs(
    payoff_values: &[f64],
    r: f64,
    t_end: f64,
    seed: u64,
) -> Result<McResult> {
    let n = payoff_values.len();
    if n < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "need at least 2 paths, got {n}"
        )));
    }
    let n_f = n as f64;
    let mean = pairwise_sum(payoff_values) / n_f;
    let sq: Vec<f64> = payoff_values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n_f - 1.0);
    let discount = libm::exp(-r * t_end);
    let price = discount * mean;
    let std_error = discount * libm::sqrt(var / n_f);
    Ok(McResult {
        price,
        std_error,
        ci_low: price - Z95 * std_error,
        ci_high: price + Z95 * std_error,
        paths: n as u64,
        seed,
    })
}

/// Prices a European payoff by seeded Euler-scheme Monte Carlo.
///
/// Deterministic given the seed: per-path ChaCha streams plus a pairwise
/// reduction.
#[allow(clippy::too_many_arguments)]
pub fn mc_price(
    model: &DiffusionModel,
    x0: f64,
    payoff: &Payoff,
    r: f64,
    t_end: f64,
    n: usize,
    num_paths: u64,
    seed: u64,
) -> Result<McResult> {
    if n == 0 {
        return Err(Error::InvalidParameter(alloc::string::String::from(
            "need at least one time step",
        )));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "horizon must be positive and finite, got {t_end}"
        )));
    }
    if !r.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "rate must be finite, got {r}"
        )));
    }
    if num_paths < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "need at least 2 paths, got {num_paths}"
        )));
    }
    let mut values = Vec::with_capacity(num_paths as usize);
    for i in 0..num_paths {
        let mut rng = path_rng(seed, i);
        let x_t = terminal_value(model, x0, t_end, n, &mut rng)?;
        values.push(payoff.evaluate(x_t));
    }
    summarize_payoffs(&values, r, t_end, seed)
}
