//! Recursive marginal quantization: level-by-level tree construction,
//! closed-form transitions and weights, and grid-size dispatching.
//!
//! The tree is built forward in time. Level 0 is the single starting point.
//! Given level k (points x_i, weights w_i), the next marginal law is the
//! Gaussian mixture with components (m_k(x_i), v_k(x_i), w_i), where m_k and
//! v_k are the Euler transition mean and standard deviation. The level-(k+1)
//! grid is a Newton stationary point of that mixture's distortion, the
//! transition matrix collects cell probabilities of each component, and the
//! next weight vector is the weight-transition product.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::distortion::{self, Component, GaussianMixture, Grid, NewtonOptions};
use crate::gaussian::std_normal_cdf;
use crate::model::{euler_params, DiffusionModel, EulerParams, ModelKind};
use crate::{Error, Result};

/// Newton iterations used when converging the standard normal warm-start
/// grid (cheap relative to tree construction, so converged to round-off).
const WARM_START_NORMAL_ITERS: usize = 60;

/// One time level of a quantization tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    /// Time t_k = k·T/n.
    pub t: f64,
    /// Quantizer points, strictly increasing.
    pub grid: Vec<f64>,
    /// Marginal probabilities of the points.
    pub weights: Vec<f64>,
    /// Row-stochastic transition matrix from the previous level
    /// (N_{k−1} × N_k); `None` at level 0 or when dropped at build time.
    pub transition_from_prev: Option<Vec<Vec<f64>>>,
    /// Gradient sup-norm at the accepted grid (0 at level 0).
    pub newton_residual: f64,
    /// Newton iterations actually performed (0 at level 0).
    pub newton_iterations: usize,
    /// Distortion of the level's mixture at the accepted grid.
    pub distortion: f64,
}

/// Output of [`build_tree`]: the quantized Euler scheme of a diffusion.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationTree {
    /// Which model was quantized.
    pub model_kind: ModelKind,
    /// Starting value X_0.
    pub x0: f64,
    /// Horizon T.
    pub t_end: f64,
    /// Number of Euler steps n (the tree has n+1 levels).
    pub n_steps: usize,
    /// Levels 0..=n in time order.
    pub levels: Vec<Level>,
}

impl QuantizationTree {
    /// Step length T/n.
    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    /// The terminal level.
    pub fn terminal(&self) -> &Level {
        self.levels.last().expect("tree has at least level 0")
    }
}

/// Controls for [`build_tree`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Newton iteration budget per level.
    pub nr_iters: usize,
    /// Newton early-exit gradient tolerance.
    pub grad_tol: f64,
    /// Store transition matrices on the tree (needed for conditional
    /// expectations; weights are computed either way).
    pub keep_transitions: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            nr_iters: 5,
            grad_tol: 1e-10,
            keep_transitions: true,
        }
    }
}

/// Builds the quantization tree of the Euler scheme of `model` started at
/// `x0` over `n` steps up to `t_end`.
///
/// `sizes` has length n+1 with `sizes[0] = 1` (the starting value is not
/// random) and gives every level's grid size. Warm starts: level 1 is the
/// affine image of the standard normal optimal grid under the first Euler
/// transition; later levels reuse the previous grid when sizes match and
/// otherwise interpolate it in rank space. Any failure is tagged with the
/// level at which it occurred.
pub fn build_tree(
    model: &DiffusionModel,
    x0: f64,
    t_end: f64,
    n: usize,
    sizes: &[usize],
    opts: &BuildOptions,
) -> Result<QuantizationTree> {
    if !x0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "starting value must be finite, got {x0}"
        )));
    }
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
    if sizes.len() != n + 1 {
        return Err(Error::InvalidParameter(format!(
            "sizes has length {}, expected n+1 = {}",
            sizes.len(),
            n + 1
        )));
    }
    if sizes[0] != 1 {
        return Err(Error::InvalidParameter(format!(
            "sizes[0] must be 1 (the start is deterministic), got {}",
            sizes[0]
        )));
    }
    if let Some(k) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidParameter(format!(
            "sizes[{k}] must be positive"
        )));
    }
    if opts.nr_iters == 0 {
        return Err(Error::InvalidParameter(String::from(
            "nr_iters must be positive",
        )));
    }

    let dt = t_end / n as f64;
    let newton = NewtonOptions {
        nr_iters: opts.nr_iters,
        grad_tol: opts.grad_tol,
    };

    let mut levels = Vec::with_capacity(n + 1);
    levels.push(Level {
        t: 0.0,
        grid: vec![x0],
        weights: vec![1.0],
        transition_from_prev: None,
        newton_residual: 0.0,
        newton_iterations: 0,
        distortion: 0.0,
    });

    for k in 0..n {
        let level = build_next_level(model, &levels[k], k, dt, sizes[k + 1], &newton, opts)
            .map_err(|e| e.at_level(k + 1))?;
        levels.push(level);
    }

    Ok(QuantizationTree {
        model_kind: model.kind(),
        x0,
        t_end,
        n_steps: n,
        levels,
    })
}

fn build_next_level(
    model: &DiffusionModel,
    prev: &Level,
    k: usize,
    dt: f64,
    size: usize,
    newton: &NewtonOptions,
    opts: &BuildOptions,
) -> Result<Level> {
    let t_k = prev.t;
    let params: Vec<EulerParams> = prev
        .grid
        .iter()
        .map(|&x| euler_params(model, t_k, x, dt))
        .collect::<Result<_>>()?;

    // Mixture probabilities are the level weights renormalized by their sum:
    // propagation keeps the sum near 1 to round-off, and the rescale (which
    // moves no stationary point) stops that round-off from accumulating into
    // the mixture validity gate over many levels. Stored weights stay as
    // propagated.
    let total: f64 = prev.weights.iter().sum();
    let components: Vec<Component> = params
        .iter()
        .zip(&prev.weights)
        .map(|(p, &w)| Component {
            mean: p.mean,
            std: p.std,
            prob: w / total,
        })
        .collect();
    let law = GaussianMixture::new(components)?;

    let start = warm_start(&params, &prev.grid, k, size)?;
    let outcome = distortion::newton_solve(&law, start, newton)?;
    let grid = outcome.grid.into_points();

    let trans = transition_rows(&params, &grid);
    let weights = marginal_weights(&prev.weights, &trans)?;

    Ok(Level {
        t: t_k + dt,
        grid,
        weights,
        transition_from_prev: opts.keep_transitions.then_some(trans),
        newton_residual: outcome.residual,
        newton_iterations: outcome.iterations,
        distortion: outcome.distortion,
    })
}

/// Initial grid for the next level's Newton solve.
fn warm_start(params: &[EulerParams], prev_grid: &[f64], k: usize, size: usize) -> Result<Grid> {
    if k == 0 {
        // The first transition law is a single Gaussian, so the affine image
        // of the standard normal optimal grid is already stationary.
        let z = crate::gaussian::std_normal_quantizer(size, WARM_START_NORMAL_ITERS)?;
        let p = params[0];
        let pts: Vec<f64> = z.points.iter().map(|&z| p.mean + p.std * z).collect();
        return Grid::new(pts);
    }
    if prev_grid.len() == size {
        return Grid::new(prev_grid.to_vec());
    }
    Grid::new(quantile_interp(prev_grid, size))
}

/// Monotone rank-space interpolation of a grid to a new size: evaluates the
/// piecewise-linear map (2i−1)/(2N) ↦ x_i at the new ranks (2j−1)/(2M),
/// clamping beyond the end ranks and nudging any clamped duplicates apart so
/// the result is strictly increasing.
fn quantile_interp(prev: &[f64], m: usize) -> Vec<f64> {
    let np = prev.len();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let r = (2 * j + 1) as f64 / (2 * m) as f64;
        let pos = r * np as f64 - 0.5; // fractional index into prev ranks
        let v = if pos <= 0.0 {
            prev[0]
        } else if pos >= (np - 1) as f64 {
            prev[np - 1]
        } else {
            let i = pos as usize;
            let theta = pos - i as f64;
            prev[i] + theta * (prev[i + 1] - prev[i])
        };
        out.push(v);
    }
    for j in 1..m {
        if out[j] <= out[j - 1] {
            let nudge = 1e-9 * out[j - 1].abs().max(1e-9);
            out[j] = out[j - 1] + nudge;
        }
    }
    out
}

/// Transition rows from per-point Euler parameters onto a target grid: row i
/// holds the probabilities of N(mean_i, std_i²) over the grid's Voronoi
/// cells (an indicator row when std_i = 0).
fn transition_rows(params: &[EulerParams], grid_next: &[f64]) -> Vec<Vec<f64>> {
    let n = grid_next.len();
    let mids = {
        // midpoints() needs a Grid; grid_next comes from one, so rebuild the
        // boundary list directly.
        let mut m = Vec::with_capacity(n + 1);
        m.push(f64::NEG_INFINITY);
        m.extend(grid_next.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        m.push(f64::INFINITY);
        m
    };
    params
        .iter()
        .map(|p| {
            let mut row = vec![0.0; n];
            if p.std == 0.0 {
                let j = mids[1..n].partition_point(|&m| m < p.mean);
                row[j] = 1.0;
                return row;
            }
            let mut prev_cdf = 0.0;
            for (j, r) in row.iter_mut().enumerate() {
                let next_cdf = if j + 1 == n {
                    1.0
                } else {
                    std_normal_cdf((mids[j + 1] - p.mean) / p.std)
                };
                *r = next_cdf - prev_cdf;
                prev_cdf = next_cdf;
            }
            row
        })
        .collect()
}

/// Transition matrix from a level onto a target grid: entry (i, j) is the
/// probability that one Euler step from point i lands in cell j of
/// `grid_next`. Rows sum to 1 up to cdf rounding.
pub fn transitions(
    level: &Level,
    model: &DiffusionModel,
    t_k: f64,
    dt: f64,
    grid_next: &Grid,
) -> Result<Vec<Vec<f64>>> {
    let params: Vec<EulerParams> = level
        .grid
        .iter()
        .map(|&x| euler_params(model, t_k, x, dt))
        .collect::<Result<_>>()?;
    Ok(transition_rows(&params, grid_next.points()))
}

/// Next marginal weights: the vector-matrix product weights·transition,
/// accumulated with compensated summation so many-level propagation does not
/// drift.
pub fn marginal_weights(weights: &[f64], transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    if weights.len() != transition.len() {
        return Err(Error::InvalidParameter(format!(
            "weights length {} does not match transition row count {}",
            weights.len(),
            transition.len()
        )));
    }
    let cols = match transition.first() {
        Some(row) => row.len(),
        None => return Err(Error::InvalidParameter(String::from("empty transition matrix"))),
    };
    if let Some(bad) = transition.iter().position(|r| r.len() != cols) {
        return Err(Error::InvalidParameter(format!(
            "transition row {bad} has length {}, expected {cols}",
            transition[bad].len()
        )));
    }
    let mut out = vec![0.0; cols];
    let mut comp = vec![0.0; cols];
    for (w, row) in weights.iter().zip(transition) {
        for j in 0..cols {
            let y = w * row[j] - comp[j];
            let t = out[j] + y;
            comp[j] = (t - out[j]) - y;
            out[j] = t;
        }
    }
    Ok(out)
}

/// Equal dispatching of a budget of N points over levels 1..=n: every level
/// gets ⌊N/n⌋ points and the remainder is appended to the last level; level
/// 0 always has one point.
pub fn dispatch_equal(n_budget: usize, n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidParameter(String::from(
            "need at least one time step",
        )));
    }
    if n_budget < n {
        return Err(Error::InvalidParameter(format!(
            "budget {n_budget} cannot give every one of {n} levels a point"
        )));
    }
    let base = n_budget / n;
    let rem = n_budget % n;
    let mut sizes = vec![base; n + 1];
    sizes[0] = 1;
    sizes[n] += rem;
    Ok(sizes)
}

/// Distortion-rate-optimal dispatching of a budget of N points over levels
/// 1..=n in dimension d, proportional to a_ℓ^{d/(d+1)}.
///
/// `a` has length n+1 (entry 0 is unused — level 0 always has one point).
/// Floors are clamped to a minimum of 1 and any remaining budget is handed
/// out one point at a time by descending fractional part (ties to the
/// earlier level), so the interior sizes sum to exactly N whenever the
/// clamps leave room.
pub fn dispatch_optimal(a: &[f64], n_budget: usize, d: u32) -> Result<Vec<usize>> {
    if a.len() < 2 {
        return Err(Error::InvalidParameter(String::from(
            "coefficient vector must cover at least one step level",
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter(String::from("dimension must be positive")));
    }
    let n = a.len() - 1;
    if n_budget < n {
        return Err(Error::InvalidParameter(format!(
            "budget {n_budget} cannot give every one of {n} levels a point"
        )));
    }
    if let Some(bad) = a[1..].iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "a[{}] must be positive and finite, got {}",
            bad + 1,
            a[bad + 1]
        )));
    }

    let expo = d as f64 / (d as f64 + 1.0);
    let s: Vec<f64> = a[1..].iter().map(|&v| libm::pow(v, expo)).collect();
    let total: f64 = s.iter().sum();
    let raw: Vec<f64> = s.iter().map(|v| v * n_budget as f64 / total).collect();

    let mut sizes = vec![1usize; n + 1];
    for (l, r) in raw.iter().enumerate() {
        sizes[l + 1] = (*r as usize).max(1);
    }
    let assigned: usize = sizes[1..].iter().sum();
    if assigned < n_budget {
        let mut order: Vec<usize> = (0..n).collect();
        // Stable descending sort on fractional parts: ties go to the earlier
        // level.
        order.sort_by(|&i, &j| {
            let fi = raw[i] - libm::floor(raw[i]);
            let fj = raw[j] - libm::floor(raw[j]);
            fj.partial_cmp(&fi).unwrap_or(core::cmp::Ordering::Equal)
        });
        let mut rem = n_budget - assigned;
        let mut i = 0usize;
        while rem > 0 {
            sizes[order[i % n] + 1] += 1;
            rem -= 1;
            i += 1;
        }
    }
    Ok(sizes)
}

/// Conditional expectation vector E[f(X̂_{k+1}) | X̂_k = x_i] from the stored
/// transition matrix at level k+1.
pub fn conditional_expectation(
    tree: &QuantizationTree,
    k: usize,
    f: impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    if k + 1 >= tree.levels.len() {
        return Err(Error::InvalidParameter(format!(
            "level {} has no successor in a tree of {} levels",
            k,
            tree.levels.len()
        )));
    }
    let next = &tree.levels[k + 1];
    let trans = next
        .transition_from_prev
        .as_ref()
        .ok_or(Error::TransitionsDropped)?;
    let values: Vec<f64> = next.grid.iter().map(|&x| f(x)).collect();
    Ok(trans
        .iter()
        .map(|row| row.iter().zip(&values).map(|(p, v)| p * v).sum())
        .collect())
}
