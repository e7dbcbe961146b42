//! European option pricing on a quantization tree, plus the Black-Scholes
//! closed form used as a validation reference.

use alloc::boxed::Box;
use alloc::format;

use crate::gaussian::std_normal_cdf;
use crate::tree::QuantizationTree;
use crate::{Error, Result};

/// A European payoff evaluated at the terminal grid.
pub enum Payoff {
    /// (K − x)⁺.
    Put { strike: f64 },
    /// (x − K)⁺.
    Call { strike: f64 },
    /// Arbitrary pointwise payoff.
    Custom(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl core::fmt::Debug for Payoff {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Payoff::Put { strike } => f.debug_struct("Put").field("strike", strike).finish(),
            Payoff::Call { strike } => f.debug_struct("Call").field("strike", strike).finish(),
            Payoff::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Payoff {
    /// Put with a positive strike.
    pub fn put(strike: f64) -> Result<Self> {
        check_strike(strike)?;
        Ok(Payoff::Put { strike })
    }

    /// Call with a positive strike.
    pub fn call(strike: f64) -> Result<Self> {
        check_strike(strike)?;
        Ok(Payoff::Call { strike })
    }

    /// Arbitrary payoff function.
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Payoff::Custom(Box::new(f))
    }

    /// Payoff value at a terminal point.
    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            Payoff::Put { strike } => (strike - x).max(0.0),
            Payoff::Call { strike } => (x - strike).max(0.0),
            Payoff::Custom(f) => f(x),
        }
    }
}

fn check_strike(strike: f64) -> Result<()> {
    if !(strike > 0.0 && strike.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "strike must be positive and finite, got {strike}"
        )));
    }
    Ok(())
}

/// Discounted European price on the terminal grid:
/// e^{−rT}·Σ_i payoff(x_i)·w_i.
pub fn price_european(tree: &QuantizationTree, payoff: &Payoff, r: f64) -> Result<f64> {
    if !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rate must be finite, got {r}"
        )));
    }
    let level = tree.terminal();
    let sum: f64 = level
        .grid
        .iter()
        .zip(&level.weights)
        .map(|(&x, &w)| payoff.evaluate(x) * w)
        .sum();
    Ok(libm::exp(-r * tree.t_end) * sum)
}

/// Black-Scholes European put price
/// K·e^{−rT}·Φ(−d₂) − s0·Φ(−d₁) with d₁ = (ln(s0/K) + (r+σ²/2)T)/(σ√T),
/// d₂ = d₁ − σ√T.
pub fn bs_put_closed_form(s0: f64, strike: f64, r: f64, sigma: f64, t: f64) -> Result<f64> {
    for (name, v) in [("s0", s0), ("strike", strike), ("sigma", sigma), ("T", t)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rate must be finite, got {r}"
        )));
    }
    let vol_t = sigma * libm::sqrt(t);
    let d1 = (libm::log(s0 / strike) + (r + 0.5 * sigma * sigma) * t) / vol_t;
    let d2 = d1 - vol_t;
    Ok(strike * libm::exp(-r * t) * std_normal_cdf(-d2) - s0 * std_normal_cdf(-d1))
}
