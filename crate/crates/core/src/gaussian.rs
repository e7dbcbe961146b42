//! Standard-normal numerics and the optimal quantizer of N(0,1).
//!
//! Houses the pdf/cdf pair used throughout the distortion formulas, the
//! absolute moments E|Z|^p entering the error-bound constants, the quantile
//! function used for warm-start seeding and inverse-transform sampling, and
//! the regular optimal quantizer of the standard Gaussian together with a
//! memoization cache so warm starts never recompute it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::distortion::{self, Component, GaussianMixture, Grid, NewtonOptions};
use crate::{Error, Result};

/// 1/√(2π), the standard-normal density at zero.
pub const FRAC_1_SQRT_2PI: f64 = 0.3989422804014327;

/// Standard-normal probability density. Returns 0 at ±∞.
pub fn std_normal_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * z * z)
}

/// Standard-normal cumulative distribution, accurate to ~1e-16 absolute.
///
/// Accepts ±∞ and returns the exact limits 0 and 1; implemented through the
/// complementary error function to keep full precision in the tails.
pub fn std_normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-z * core::f64::consts::FRAC_1_SQRT_2)
}

/// Standard-normal quantile (inverse cdf) for `p` in the open interval (0,1).
///
/// Wichura's algorithm AS 241 (PPND16), accurate to about 1e-15 relative.
/// Used for quantile seeding of Newton solves and for inverse-transform
/// sampling in the Monte Carlo module (no rejection, hence reproducible).
///
/// # Panics
/// Panics if `p` is outside (0,1); callers control their inputs.
pub fn std_normal_inv_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0,1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * rational(r, &INV_A, &INV_B);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = libm::sqrt(-libm::log(r));
    let x = if r <= 5.0 {
        rational(r - 1.6, &INV_C, &INV_D)
    } else {
        rational(r - 5.0, &INV_E, &INV_F)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Evaluates num(r)/den(r) with Horner's rule; `den` has an implicit leading 1.
fn rational(r: f64, num: &[f64; 8], den: &[f64; 7]) -> f64 {
    let mut n = num[7];
    for c in num[..7].iter().rev() {
        n = n * r + c;
    }
    let mut d = den[6];
    for c in den[..6].iter().rev() {
        d = d * r + c;
    }
    n / (d * r + 1.0)
}

// Inverse-cdf coefficient sets (central, middle, and far-tail regions),
// kept digit-for-digit as published.
#[allow(clippy::excessive_precision)]
const INV_A: [f64; 8] = [
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
#[allow(clippy::excessive_precision)]
const INV_B: [f64; 7] = [
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
#[allow(clippy::excessive_precision)]
const INV_C: [f64; 8] = [
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
#[allow(clippy::excessive_precision)]
const INV_D: [f64; 7] = [
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
#[allow(clippy::excessive_precision)]
const INV_E: [f64; 8] = [
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
#[allow(clippy::excessive_precision)]
const INV_F: [f64; 7] = [
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

/// Absolute moment E|Z|^p of a standard normal for p in (2,3].
///
/// Closed form 2^{p/2}·Γ((p+1)/2)/√π; rejects p outside the range the
/// error-bound constants are stated for.
pub fn abs_moment(p: f64) -> Result<f64> {
    if !(p > 2.0 && p <= 3.0) {
        return Err(Error::InvalidParameter(format!(
            "abs_moment requires p in (2,3], got {p}"
        )));
    }
    Ok(libm::pow(2.0, 0.5 * p) * libm::tgamma(0.5 * (p + 1.0)) / libm::sqrt(core::f64::consts::PI))
}

/// An optimal (stationary) quadratic quantizer of the standard normal.
#[derive(Debug, Clone, PartialEq)]
pub struct StdNormalQuantizer {
    /// Strictly increasing quantizer points.
    pub points: Vec<f64>,
    /// Cell masses cdf(x_{i+1/2}) − cdf(x_{i−1/2}); they sum to one.
    pub weights: Vec<f64>,
    /// Quadratic distortion E min_i (Z − x_i)².
    pub distortion: f64,
    /// Gradient sup-norm at the returned points.
    pub residual: f64,
}

/// Computes the optimal N-point quantizer of N(0,1) by Newton-Raphson.
///
/// Seeds at the quantiles (2i−1)/(2N) and iterates until the distortion
/// gradient sup-norm falls below 1e-10 or `nr_iters` is exhausted, in which
/// case the residual field reports how far the iteration got.
pub fn std_normal_quantizer(n: usize, nr_iters: usize) -> Result<StdNormalQuantizer> {
    if n == 0 {
        return Err(Error::InvalidParameter(String::from(
            "quantizer size must be at least 1",
        )));
    }
    let law = GaussianMixture::new(alloc::vec![Component {
        mean: 0.0,
        std: 1.0,
        prob: 1.0,
    }])?;
    let seed: Vec<f64> = (1..=n)
        .map(|i| std_normal_inv_cdf((2 * i - 1) as f64 / (2 * n) as f64))
        .collect();
    let outcome = distortion::newton_solve(
        &law,
        Grid::new(seed)?,
        &NewtonOptions {
            nr_iters,
            ..NewtonOptions::default()
        },
    )?;
    let mids = distortion::midpoints(&outcome.grid);
    let weights = mids
        .windows(2)
        .map(|w| std_normal_cdf(w[1]) - std_normal_cdf(w[0]))
        .collect();
    Ok(StdNormalQuantizer {
        points: outcome.grid.into_points(),
        weights,
        distortion: outcome.distortion,
        residual: outcome.residual,
    })
}

/// Memoizes standard-normal quantizers by size.
///
/// Lookups hand out shared `Arc`s so a cached grid is computed once per
/// process. Inserting requires `&mut self`; populate the cache before any
/// parallel section (tree levels are built sequentially, so the builder's
/// single `&mut` borrow is already the natural usage).
#[derive(Debug, Default)]
pub struct QuantizerCache {
    iters: BTreeMap<usize, Arc<StdNormalQuantizer>>,
}

impl QuantizerCache {
    /// An empty cache.
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the cached N-point quantizer, computing it on first use.
    ///
    /// Cached entries use 60 Newton iterations — far past convergence for
    /// every practical size, so cache hits never depend on request order.
    pub fn get(&mut self, n: usize) -> Result<Arc<StdNormalQuantizer>> {
        if let Some(q) = self.iters.get(&n) {
            return Ok(Arc::clone(q));
        }
        let q = Arc::new(std_normal_quantizer(n, 60)?);
        self.iters.insert(n, Arc::clone(&q));
        Ok(q)
    }
}
