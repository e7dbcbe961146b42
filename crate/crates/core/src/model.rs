//! One-dimensional diffusion models dX = b(t, X)dt + σ(t, X)dW and their
//! Euler-scheme transition parameters.
//!
//! A model carries its coefficient functions plus the Lipschitz and linear
//! growth constants used by the a-priori error bounds. Three standard models
//! are built in; arbitrary coefficients are accepted through
//! [`DiffusionModel::custom`].

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

use crate::{Error, Result};

/// Coefficient closure type: arguments are (t, x).
pub type Coefficient = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Identifies a model for reporting and serialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// b = 0, σ = 1.
    Brownian,
    /// b(x) = rate·x, σ(x) = sigma·x.
    BlackScholes { rate: f64, sigma: f64 },
    /// b(x) = rate·x, σ(x) = theta·|x|^{delta+1}/√(1+x²) — a bounded-volatility
    /// stand-in for the CEV model with the same small-x behaviour.
    PseudoCev { rate: f64, theta: f64, delta: f64 },
    /// User-supplied coefficients.
    Custom,
}

/// A diffusion model: coefficients plus the constants entering the error
/// bounds.
pub struct DiffusionModel {
    kind: ModelKind,
    drift: Coefficient,
    vol: Coefficient,
    lip_drift: f64,
    lip_vol: f64,
    linear_growth: f64,
}

impl core::fmt::Debug for DiffusionModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DiffusionModel")
            .field("kind", &self.kind)
            .field("lip_drift", &self.lip_drift)
            .field("lip_vol", &self.lip_vol)
            .field("linear_growth", &self.linear_growth)
            .finish()
    }
}

impl DiffusionModel {
    /// Standard Brownian motion: b = 0, σ = 1.
    pub fn brownian() -> Self {
        Self {
            kind: ModelKind::Brownian,
            drift: Box::new(|_, _| 0.0),
            vol: Box::new(|_, _| 1.0),
            lip_drift: 0.0,
            lip_vol: 0.0,
            linear_growth: 1.0,
        }
    }

    /// Black-Scholes: b(x) = rate·x, σ(x) = sigma·x. Requires sigma > 0 and
    /// finite rate.
    pub fn black_scholes(rate: f64, sigma: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("rate must be finite, got {rate}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self {
            kind: ModelKind::BlackScholes { rate, sigma },
            drift: Box::new(move |_, x| rate * x),
            vol: Box::new(move |_, x| sigma * x),
            lip_drift: rate.abs(),
            lip_vol: sigma,
            linear_growth: rate.abs().max(sigma),
        })
    }

    /// Pseudo-CEV: b(x) = rate·x, σ(x) = theta·|x|^{delta+1}/√(1+x²).
    /// Requires theta > 0, delta ∈ (0, 1), and finite rate. The volatility is
    /// globally Lipschitz with constant theta·(1+delta) and bounded by
    /// theta·|x|^delta.
    pub fn pseudo_cev(rate: f64, theta: f64, delta: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("rate must be finite, got {rate}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self {
            kind: ModelKind::PseudoCev { rate, theta, delta },
            drift: Box::new(move |_, x| rate * x),
            vol: Box::new(move |_, x| {
                theta * libm::pow(x.abs(), delta + 1.0) / libm::sqrt(1.0 + x * x)
            }),
            lip_drift: rate.abs(),
            lip_vol: theta * (1.0 + delta),
            linear_growth: rate.abs().max(theta),
        })
    }

    /// A model from arbitrary coefficients and bound constants.
    ///
    /// `lip_drift` and `lip_vol` are the Lipschitz constants of b and σ in x
    /// (uniform in t); `linear_growth` is an L with |b(t,x)| ∨ |σ(t,x)| ≤
    /// L·(1+|x|). They feed the error bounds only — pricing and grid
    /// optimization never read them.
    pub fn custom(
        drift: Coefficient,
        vol: Coefficient,
        lip_drift: f64,
        lip_vol: f64,
        linear_growth: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("lip_drift", lip_drift),
            ("lip_vol", lip_vol),
            ("linear_growth", linear_growth),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and nonnegative, got {value}"
                )));
            }
        }
        Ok(Self {
            kind: ModelKind::Custom,
            drift,
            vol,
            lip_drift,
            lip_vol,
            linear_growth,
        })
    }

    /// Which model this is.
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Drift b(t, x).
    pub fn drift(&self, t: f64, x: f64) -> f64 {
        (self.drift)(t, x)
    }

    /// Volatility σ(t, x).
    pub fn vol(&self, t: f64, x: f64) -> f64 {
        (self.vol)(t, x)
    }

    /// Lipschitz constant of the drift in x.
    pub fn lip_drift(&self) -> f64 {
        self.lip_drift
    }

    /// Lipschitz constant of the volatility in x.
    pub fn lip_vol(&self) -> f64 {
        self.lip_vol
    }

    /// Linear growth constant L with |b| ∨ |σ| ≤ L·(1+|x|).
    pub fn linear_growth(&self) -> f64 {
        self.linear_growth
    }
}

/// Conditional law parameters of one Euler step: given X̂_k = x, the next
/// value is N(mean, std²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    /// x + Δ·b(t, x).
    pub mean: f64,
    /// √Δ·|σ(t, x)| (the sign of σ is irrelevant to the law).
    pub std: f64,
}

/// Mean and standard deviation of the Euler transition from x at time t over
/// a step of length dt. Errors when the coefficients return non-finite
/// values.
pub fn euler_params(model: &DiffusionModel, t: f64, x: f64, dt: f64) -> Result<EulerParams> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step length must be positive and finite, got {dt}"
        )));
    }
    let mean = x + dt * model.drift(t, x);
    let std = libm::sqrt(dt) * model.vol(t, x).abs();
    if !mean.is_finite() || !std.is_finite() {
        return Err(Error::ModelEvaluation { t, x });
    }
    Ok(EulerParams { mean, std })
}

/// One Euler update x ← mean + std·z for an innovation z.
pub fn euler_step(model: &DiffusionModel, t: f64, x: f64, dt: f64, z: f64) -> Result<f64> {
    let p = euler_params(model, t, x, dt)?;
    Ok(p.mean + p.std * z)
}

/// Time grid t_k = k·T/n for k = 0..=n.
pub fn time_grid(t_end: f64, n: usize) -> Result<alloc::vec::Vec<f64>> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be positive and finite, got {t_end}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(String::from(
            "need at least one time step",
        )));
    }
    let dt = t_end / n as f64;
    Ok((0..=n).map(|k| k as f64 * dt).collect())
}
