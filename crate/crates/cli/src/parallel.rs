//! Parallel Monte Carlo pricing, bit-identical to the serial driver.
//!
//! Each path draws from its own counter-derived substream, so the simulated
//! values depend only on (seed, path index) — never on scheduling. The
//! per-path payoffs are collected in path order and reduced with the same
//! fixed-shape pairwise sum as the serial driver, so price and standard
//! error are identical to the last bit for every thread count.

use anyhow::{bail, Result};
use rayon::iter::{IntoParallelIterator, ParallelIterator};
use rayon::ThreadPoolBuilder;

use rmq_core::mc::{path_rng, summarize_payoffs, terminal_value, McResult};
use rmq_core::model::DiffusionModel;
use rmq_core::pricing::Payoff;

/// Simulates the Euler terminal values of `num_paths` paths in path order.
///
/// `threads` selects a dedicated pool size; `None` uses the global pool.
pub fn mc_terminals(
    model: &DiffusionModel,
    x0: f64,
    t_end: f64,
    n: usize,
    num_paths: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<f64>> {
    if n == 0 {
        bail!("need at least one time step");
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        bail!("horizon must be positive and finite, got {t_end}");
    }
    let simulate = || -> Result<Vec<f64>, rmq_core::Error> {
        (0..num_paths)
            .into_par_iter()
            .map(|path| {
                let mut rng = path_rng(seed, path);
                terminal_value(model, x0, t_end, n, &mut rng)
            })
            .collect()
    };
    let values = match threads {
        Some(k) => {
            if k == 0 {
                bail!("need at least one thread");
            }
            ThreadPoolBuilder::new().num_threads(k).build()?.install(simulate)
        }
        None => simulate(),
    }?;
    Ok(values)
}

/// Prices a European payoff by parallel Euler-scheme Monte Carlo.
///
/// Equivalent to the serial driver for the same seed: same draws, same
/// reduction order, bit-identical result.
#[allow(clippy::too_many_arguments)]
pub fn mc_price_parallel(
    model: &DiffusionModel,
    x0: f64,
    payoff: &Payoff,
    r: f64,
    t_end: f64,
    n: usize,
    num_paths: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<McResult> {
    let terminals = mc_terminals(model, x0, t_end, n, num_paths, seed, threads)?;
    let values: Vec<f64> = terminals.iter().map(|&x| payoff.evaluate(x)).collect();
    Ok(summarize_payoffs(&values, r, t_end, seed)?)
}

/// Summarizes already-simulated terminal values under a payoff; used to
/// reprice one simulation at several strikes.
pub fn summarize_terminals(
    terminals: &[f64],
    payoff: &Payoff,
    r: f64,
    t_end: f64,
    seed: u64,
) -> Result<McResult> {
    let values: Vec<f64> = terminals.iter().map(|&x| payoff.evaluate(x)).collect();
    Ok(summarize_payoffs(&values, r, t_end, seed)?)
}
