//! Distortion of a grid against a finite Gaussian mixture: closed-form
//! value, gradient, tridiagonal Hessian, and a safeguarded Newton solver.
//!
//! The quadratic distortion of a grid Γ = {x_1 < … < x_N} against a mixture
//! Σ_i p_i·N(m_i, v_i²) decomposes over Voronoi cells, whose boundaries are
//! the midpoints x_{j±1/2} (with x_{1/2} = −∞ and x_{N+1/2} = +∞). All three
//! quantities reduce to cdf/pdf evaluations at the standardized midpoints
//! α_{ij} = (x_{j−1/2} − m_i)/v_i and β_{ij} = (x_{j+1/2} − m_i)/v_i, so a
//! single pass per component computes distortion, gradient, and Hessian
//! together. The gradient carries the customary half factor (stationarity
//! zeros are unchanged and Newton directions are invariant under a common
//! positive scaling of gradient and Hessian).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::gaussian::{std_normal_cdf, std_normal_pdf};
use crate::{Error, Result};

/// A strictly increasing, finite set of quantizer points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    /// Validates and wraps quantizer points (nonempty, finite, strictly
    /// increasing).
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid(String::from("grid must be nonempty")));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point {p}")));
        }
        if !is_strictly_increasing(&points) {
            return Err(Error::InvalidGrid(String::from(
                "points must be strictly increasing",
            )));
        }
        Ok(Self { points })
    }

    /// Grid of a single point.
    pub fn single(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    /// The points, strictly increasing.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// A grid is never empty; provided for clippy-style completeness.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Consumes the grid, returning the underlying points.
    pub fn into_points(self) -> Vec<f64> {
        self.points
    }
}

pub(crate) fn is_strictly_increasing(points: &[f64]) -> bool {
    points.windows(2).all(|w| w[0] < w[1])
}

/// One Gaussian mixture component (mean, standard deviation, probability).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub mean: f64,
    pub std: f64,
    pub prob: f64,
}

/// A finite Gaussian mixture — the one-step conditional law of the Euler
/// scheme given the previous quantized value.
///
/// Components with `std == 0` are Dirac masses and are handled by the
/// continuous limit of the Gaussian formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
}

impl GaussianMixture {
    /// Validates component triples: finite means, nonnegative finite
    /// standard deviations, nonnegative probabilities summing to 1 within
    /// 1e-12.
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture(String::from(
                "mixture must have at least one component",
            )));
        }
        let mut total = 0.0;
        for c in &components {
            if !c.mean.is_finite() {
                return Err(Error::InvalidMixture(format!("non-finite mean {}", c.mean)));
            }
            if !(c.std >= 0.0 && c.std.is_finite()) {
                return Err(Error::InvalidMixture(format!(
                    "standard deviation must be finite and nonnegative, got {}",
                    c.std
                )));
            }
            if !(c.prob >= 0.0 && c.prob.is_finite()) {
                return Err(Error::InvalidMixture(format!(
                    "probability must be finite and nonnegative, got {}",
                    c.prob
                )));
            }
            total += c.prob;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { components })
    }

    /// The component triples.
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Mixture mean Σ p_i·m_i.
    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.prob * c.mean).sum()
    }
}

/// A tridiagonal matrix (the Hessian's exact sparsity structure).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// Subdiagonal, length N−1.
    pub sub: Vec<f64>,
    /// Diagonal, length N.
    pub diag: Vec<f64>,
    /// Superdiagonal, length N−1.
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }
}

/// Voronoi cell boundaries: (−∞, (x_1+x_2)/2, …, (x_{N−1}+x_N)/2, +∞).
pub fn midpoints(grid: &Grid) -> Vec<f64> {
    let pts = grid.points();
    let mut mids = Vec::with_capacity(pts.len() + 1);
    mids.push(f64::NEG_INFINITY);
    mids.extend(pts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    mids.push(f64::INFINITY);
    mids
}

/// Distortion, gradient, and Hessian of a grid against a mixture, computed
/// in one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureEval {
    /// E[d(X, Γ)²] — the quadratic distortion.
    pub distortion: f64,
    /// Half-gradient of the distortion in the grid points.
    pub gradient: Vec<f64>,
    /// Jacobian of the half-gradient (exactly symmetric by construction).
    pub hessian: Tridiagonal,
}

impl MixtureEval {
    /// Gradient sup-norm — the stationarity residual.
    pub fn residual(&self) -> f64 {
        self.gradient.iter().fold(0.0, |a, g| a.max(g.abs()))
    }
}

/// Evaluates distortion, gradient, and Hessian together.
///
/// Each cell integral is closed-form: with α, β the standardized cell
/// boundaries and x the cell's point,
/// ∫ (u−x)² dN(m,v²) = ((m−x)²+v²)(cdf(β)−cdf(α)) + v²(α·pdf(α)−β·pdf(β))
/// + 2v(m−x)(pdf(α)−pdf(β)), with z·pdf(z) → 0 at ±∞.
///
/// Infinite midpoints never enter arithmetic beyond the lookups
/// cdf(±∞) ∈ {0,1}, pdf(±∞) = 0.
pub fn evaluate(law: &GaussianMixture, grid: &Grid) -> MixtureEval {
    let pts = grid.points();
    let n = pts.len();
    let mids = midpoints(grid);

    let mut dist = 0.0;
    let mut grad = vec![0.0; n];
    let mut hess = Tridiagonal::zeros(n);

    // Per-component buffers of cdf, pdf, and z·pdf at the standardized
    // midpoints, shared by all three outputs.
    let mut c = vec![0.0; n + 1];
    let mut f = vec![0.0; n + 1];
    let mut zf = vec![0.0; n + 1];

    for comp in law.components() {
        let (m, v, p) = (comp.mean, comp.std, comp.prob);
        if p == 0.0 {
            continue;
        }
        if v == 0.0 {
            // Dirac limit: the whole mass sits in the cell owning `m`
            // (half-open cells (x_{j−1/2}, x_{j+1/2}], ties to lower index).
            let j = owning_cell(&mids, m);
            dist += p * (m - pts[j]) * (m - pts[j]);
            grad[j] += p * (pts[j] - m);
            hess.diag[j] += p;
            continue;
        }

        c[0] = 0.0;
        f[0] = 0.0;
        zf[0] = 0.0;
        c[n] = 1.0;
        f[n] = 0.0;
        zf[n] = 0.0;
        for t in 1..n {
            let z = (mids[t] - m) / v;
            c[t] = std_normal_cdf(z);
            f[t] = std_normal_pdf(z);
            zf[t] = z * f[t];
        }

        for j in 0..n {
            let dc = c[j + 1] - c[j];
            let df = f[j + 1] - f[j];
            let dzf = zf[j + 1] - zf[j];
            let mx = m - pts[j];
            dist += p * ((mx * mx + v * v) * dc - v * v * dzf - 2.0 * v * mx * df);
            grad[j] += p * (-mx * dc + v * df);
            hess.diag[j] += p * dc;
        }
        // Interior midpoint t couples points t−1 and t; the same term feeds
        // both diagonal entries and the (symmetric) off-diagonals.
        for t in 1..n {
            let s = p * f[t] * (pts[t] - pts[t - 1]) / (4.0 * v);
            hess.diag[t - 1] -= s;
            hess.diag[t] -= s;
            hess.sub[t - 1] -= s;
            hess.sup[t - 1] -= s;
        }
    }

    MixtureEval {
        distortion: dist,
        gradient: grad,
        hessian: hess,
    }
}

/// Index of the Voronoi cell (x_{j−1/2}, x_{j+1/2}] containing `x`.
fn owning_cell(mids: &[f64], x: f64) -> usize {
    // Interior midpoints are mids[1..n]; count those strictly below x, so a
    // tie x == midpoint lands in the lower cell.
    mids[1..mids.len() - 1].partition_point(|&m| m < x)
}

/// Quadratic distortion E[d(X, Γ)²] of the grid against the mixture.
pub fn distortion(law: &GaussianMixture, grid: &Grid) -> f64 {
    evaluate(law, grid).distortion
}

/// Half-gradient of the distortion in the grid points; zero exactly at
/// stationary grids.
pub fn gradient(law: &GaussianMixture, grid: &Grid) -> Vec<f64> {
    evaluate(law, grid).gradient
}

/// Tridiagonal Hessian matching [`gradient`]'s scaling.
pub fn hessian(law: &GaussianMixture, grid: &Grid) -> Tridiagonal {
    evaluate(law, grid).hessian
}

/// Solves T·x = rhs by the Thomas algorithm.
///
/// Errors on dimension mismatch or a vanishing pivot (the Hessian is
/// diagonally dominant near an optimum, so pivoting is unnecessary there).
pub fn solve_tridiagonal(t: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = t.diag.len();
    if rhs.len() != n || t.sub.len() + 1 != n.max(1) || t.sup.len() != t.sub.len() {
        return Err(Error::InvalidParameter(format!(
            "tridiagonal dimensions inconsistent: diag {}, sub {}, sup {}, rhs {}",
            n,
            t.sub.len(),
            t.sup.len(),
            rhs.len()
        )));
    }
    let mut cp = vec![0.0; n.saturating_sub(1)];
    let mut dp = vec![0.0; n];
    let mut piv = t.diag[0];
    if piv.abs() < 1e-300 || !piv.is_finite() {
        return Err(Error::SingularSystem { row: 0, pivot: piv });
    }
    if n > 1 {
        cp[0] = t.sup[0] / piv;
    }
    dp[0] = rhs[0] / piv;
    for i in 1..n {
        piv = t.diag[i] - t.sub[i - 1] * cp[i - 1];
        if piv.abs() < 1e-300 || !piv.is_finite() {
            return Err(Error::SingularSystem { row: i, pivot: piv });
        }
        if i < n - 1 {
            cp[i] = t.sup[i] / piv;
        }
        dp[i] = (rhs[i] - t.sub[i - 1] * dp[i - 1]) / piv;
    }
    let mut x = dp;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= cp[i] * next;
    }
    Ok(x)
}

/// Maximum step halvings before a Newton step is abandoned.
pub const MAX_HALVINGS: usize = 30;

/// Newton direction H⁻¹g, after regularizing isolated all-zero Hessian rows.
///
/// A grid point whose cell carries no numerically visible mass has an
/// exactly zero gradient entry, diagonal, and couplings; giving that row a
/// unit diagonal leaves the point in place (zero direction) while the
/// points that do see mass still take their Newton step.
fn newton_direction(eval: &mut MixtureEval) -> Result<Vec<f64>> {
    let h = &mut eval.hessian;
    let n = h.diag.len();
    for j in 0..n {
        let isolated = h.diag[j] == 0.0
            && (j == 0 || h.sub[j - 1] == 0.0)
            && (j + 1 == n || h.sup[j] == 0.0);
        if isolated {
            h.diag[j] = 1.0;
        }
    }
    solve_tridiagonal(h, &eval.gradient)
}

/// One Newton-Raphson step x ← x − H⁻¹g with an ordering safeguard.
///
/// If the full step breaks strict ordering the step is halved (at most
/// [`MAX_HALVINGS`] times); ordering is restored for small enough steps
/// because the starting grid is strictly ordered.
pub fn newton_step(law: &GaussianMixture, grid: &Grid) -> Result<Grid> {
    let mut eval = evaluate(law, grid);
    let direction = newton_direction(&mut eval)?;
    let (candidate, _) = damped_candidate(grid.points(), &direction, 1.0, 0)?;
    Grid::new(candidate)
}

/// Shrinks `scale` by halving until `points − scale·direction` is strictly
/// increasing; returns the candidate and the scale that produced it.
fn damped_candidate(points: &[f64], direction: &[f64], mut scale: f64, iteration: usize) -> Result<(Vec<f64>, f64)> {
    for _ in 0..=MAX_HALVINGS {
        let candidate: Vec<f64> = points
            .iter()
            .zip(direction)
            .map(|(x, d)| x - scale * d)
            .collect();
        if is_strictly_increasing(&candidate) && candidate.iter().all(|x| x.is_finite()) {
            return Ok((candidate, scale));
        }
        scale *= 0.5;
    }
    Err(Error::OrderingUnrecoverable {
        iteration,
        halvings: MAX_HALVINGS,
    })
}

/// Controls for the Newton driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Iteration budget (the reference experiments use 5).
    pub nr_iters: usize,
    /// Early exit once the gradient sup-norm falls at or below this.
    pub grad_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            nr_iters: 5,
            grad_tol: 1e-10,
        }
    }
}

/// Result of a Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    /// The final (strictly ordered) grid.
    pub grid: Grid,
    /// Distortion at the final grid.
    pub distortion: f64,
    /// Gradient sup-norm at the final grid.
    pub residual: f64,
    /// Iterations actually performed.
    pub iterations: usize,
    /// Step halvings forced by distortion increases.
    pub rejections: usize,
}

/// Runs damped Newton-Raphson from `start` on the mixture distortion.
///
/// Each iteration solves the tridiagonal system, halves the step while
/// strict ordering is violated, and then halves further while the candidate
/// would *increase* the distortion — so the final distortion never exceeds
/// the starting one. If a step can neither restore ordering nor improve the
/// distortion within [`MAX_HALVINGS`] halvings (which happens when cells
/// carry no numerically visible mass and the Newton direction degenerates),
/// the iteration stops and the current grid is returned as-is — the
/// reported residual tells the caller how converged it is. Exits early when
/// the gradient sup-norm reaches `grad_tol`.
pub fn newton_solve(law: &GaussianMixture, start: Grid, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    let mut grid = start;
    let mut eval = evaluate(law, &grid);
    let mut rejections = 0usize;
    let mut iterations = 0usize;

    for iter in 0..opts.nr_iters {
        if eval.residual() <= opts.grad_tol {
            break;
        }
        let direction = match newton_direction(&mut eval) {
            Ok(d) => d,
            // Hessian singular beyond the isolated-row fixups: the current
            // grid is the best this method can certify.
            Err(Error::SingularSystem { .. }) => break,
            Err(other) => return Err(other),
        };
        let (mut candidate, mut scale) = match damped_candidate(grid.points(), &direction, 1.0, iter) {
            Ok(found) => found,
            // A degenerate direction (numerically massless cells) that no
            // damping can order: keep the current grid.
            Err(Error::OrderingUnrecoverable { .. }) => break,
            Err(other) => return Err(other),
        };
        let mut cand_eval = evaluate(law, &Grid { points: candidate.clone() });
        let mut improved = true;
        let mut step_halvings = 0usize;
        while cand_eval.distortion > eval.distortion {
            rejections += 1;
            step_halvings += 1;
            if step_halvings > MAX_HALVINGS {
                improved = false;
                break;
            }
            scale *= 0.5;
            candidate = grid
                .points()
                .iter()
                .zip(&direction)
                .map(|(x, d)| x - scale * d)
                .collect();
            cand_eval = evaluate(law, &Grid { points: candidate.clone() });
        }
        if !improved {
            break;
        }
        grid = Grid { points: candidate };
        eval = cand_eval;
        iterations = iter + 1;
    }

    Ok(NewtonOutcome {
        residual: eval.residual(),
        distortion: eval.distortion,
        grid,
        iterations,
        rejections,
    })
}
