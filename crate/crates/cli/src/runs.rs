//! The work behind each subcommand: tree builds, benchmark tables, the
//! Brownian comparison sweep, and bound reports.

use anyhow::{bail, Result};

use crate::config::{resolve_sizes, BudgetSpec};
use crate::document::ModelSpec;
use crate::parallel::{mc_terminals, summarize_terminals};
use rmq_core::bounds::{
    a_uniform_bound, big_k_p, c_b_sigma, kappa_p, theorem_bound, AllocReading, BoundParams,
};
use rmq_core::gaussian::QuantizerCache;
use rmq_core::mc::McResult;
use rmq_core::model::{time_grid, DiffusionModel};
use rmq_core::pricing::{bs_put_closed_form, price_european, Payoff};
use rmq_core::tree::{build_tree, dispatch_equal, dispatch_optimal, BuildOptions, QuantizationTree};

/// Everything needed to build one tree.
#[derive(Debug, Clone)]
pub struct BuildRequest {
    /// Model selection.
    pub model: ModelSpec,
    /// Starting value.
    pub x0: f64,
    /// Horizon.
    pub t_end: f64,
    /// Number of time steps.
    pub n: usize,
    /// Point budget across levels.
    pub budget: BudgetSpec,
    /// Newton iterations per level.
    pub nr_iters: usize,
    /// Whether the per-level transition matrices stay in the tree.
    pub keep_transitions: bool,
}

/// Builds the tree described by a request.
pub fn build_from_request(req: &BuildRequest) -> Result<QuantizationTree> {
    let model = req.model.to_model()?;
    let sizes = resolve_sizes(&req.budget, &model, req.x0, req.t_end, req.n)?;
    let opts = BuildOptions {
        nr_iters: req.nr_iters,
        keep_transitions: req.keep_transitions,
        ..BuildOptions::default()
    };
    Ok(build_tree(&model, req.x0, req.t_end, req.n, &sizes, &opts)?)
}

/// Prices a payoff on a tree and optionally bounds the discounted pricing
/// error of a Lipschitz payoff: lip·e^{−rT}·(cumulative terminal L² bound).
pub fn price_report(
    tree: &QuantizationTree,
    payoff: &Payoff,
    r: f64,
    bound_lip: Option<f64>,
) -> Result<(f64, Option<f64>)> {
    let price = price_european(tree, payoff, r)?;
    let bound = match bound_lip {
        None => None,
        Some(lip) => {
            if !(lip >= 0.0 && lip.is_finite()) {
                bail!("Lipschitz constant must be finite and nonnegative, got {lip}");
            }
            let spec = ModelSpec::from_kind(tree.model_kind)?;
            let model = spec.to_model()?;
            let params = BoundParams::for_model(&model, tree.x0, tree.dt());
            let sizes: Vec<usize> = tree.levels.iter().map(|level| level.grid.len()).collect();
            let t_grid = time_grid(tree.t_end, tree.n_steps)?;
            let b = theorem_bound(tree.n_steps, &sizes, &t_grid, &params)?;
            Some(lip * (-r * tree.t_end).exp() * b)
        }
    };
    Ok((price, bound))
}

/// The error-bound constants and the cumulative bound for one configuration.
#[derive(Debug, Clone, Copy)]
pub struct BoundsReport {
    /// Moment order p.
    pub p: f64,
    /// Linear-growth rate κ_p of the p-th moment.
    pub kappa_p: f64,
    /// Additive constant K_p of the moment recursion.
    pub big_k_p: f64,
    /// Lipschitz propagation constant C_{b,σ}.
    pub c_b_sigma: f64,
    /// Uniform-in-time envelope of the a-coefficients.
    pub a_uniform: f64,
    /// Cumulative L² bound at the requested level.
    pub bound: f64,
}

/// Computes the constants table and the cumulative bound at level `k`.
#[allow(clippy::too_many_arguments)]
pub fn bounds_report(
    model: &DiffusionModel,
    x0: f64,
    t_end: f64,
    n: usize,
    sizes: &[usize],
    k: usize,
    p: f64,
    k_universal: f64,
    reading: AllocReading,
) -> Result<BoundsReport> {
    let mut params = BoundParams::for_model(model, x0, t_end / n as f64);
    params.p = p;
    params.k_universal = k_universal;
    params.reading = reading;
    let t_grid = time_grid(t_end, n)?;
    Ok(BoundsReport {
        p,
        kappa_p: kappa_p(&params),
        big_k_p: big_k_p(&params)?,
        c_b_sigma: c_b_sigma(&params),
        a_uniform: a_uniform_bound(t_end, &params)?,
        bound: theorem_bound(k, sizes, &t_grid, &params)?,
    })
}

/// One row of the Brownian terminal-error comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    /// Total point budget.
    pub budget: usize,
    /// Terminal quantization error under equal dispatching.
    pub err_equal: f64,
    /// Terminal quantization error under optimal dispatching.
    pub err_optimal: f64,
    /// Error of the optimal standard-normal quantizer at the equal
    /// dispatch's terminal grid size.
    pub err_regular: f64,
}

/// Sweeps Brownian motion over point budgets: recursive quantization under
/// both dispatching schemes against direct quantization of the terminal law.
///
/// Horizon 1 over `n` steps; the terminal law is exactly N(0,1), so the
/// regular baseline needs no rescaling. Errors are root distortions.
pub fn brownian_comparison(n: usize, budgets: &[usize], nr_iters: usize) -> Result<Vec<CompareRow>> {
    let model = DiffusionModel::brownian();
    let dt = 1.0 / n as f64;
    let a = rmq_core::bounds::brownian_a_vector(n, dt)?;
    let opts = BuildOptions {
        nr_iters,
        keep_transitions: false,
        ..BuildOptions::default()
    };
    let mut cache = QuantizerCache::new();
    let mut rows = Vec::with_capacity(budgets.len());
    for &budget in budgets {
        let sizes_eq = dispatch_equal(budget, n)?;
        let sizes_opt = dispatch_optimal(&a, budget, 1)?;
        let tree_eq = build_tree(&model, 0.0, 1.0, n, &sizes_eq, &opts)?;
        let tree_opt = build_tree(&model, 0.0, 1.0, n, &sizes_opt, &opts)?;
        let regular = cache.get(*sizes_eq.last().expect("nonempty sizes"))?;
        rows.push(CompareRow {
            budget,
            err_equal: tree_eq.terminal().distortion.sqrt(),
            err_optimal: tree_opt.terminal().distortion.sqrt(),
            err_regular: regular.distortion.sqrt(),
        });
    }
    Ok(rows)
}

/// Benchmark table selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableName {
    /// Pseudo-CEV puts over the volatility scale ϑ.
    Table1,
    /// Pseudo-CEV puts over the strike at ϑ = 4.
    Table2,
    /// Black-Scholes puts over the volatility, with closed forms.
    Table3,
    /// Black-Scholes puts over the strike at σ = 0.4, with closed forms.
    Table4,
}

impl TableName {
    /// Name of the varying first column.
    pub fn first_column(self) -> &'static str {
        match self {
            TableName::Table1 => "theta",
            TableName::Table2 | TableName::Table4 => "strike",
            TableName::Table3 => "sigma",
        }
    }

    /// The full set of first-column values.
    pub fn default_rows(self) -> &'static [f64] {
        match self {
            TableName::Table1 => &[0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 4.0],
            TableName::Table2 | TableName::Table4 => {
                &[100.0, 105.0, 110.0, 115.0, 120.0, 125.0, 130.0]
            }
            TableName::Table3 => &[0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.20, 0.30, 0.40],
        }
    }
}

/// Parameters of a table run. Defaults reproduce the benchmarks; smaller
/// values give quick smoke runs.
#[derive(Debug, Clone)]
pub struct TableRequest {
    /// Which table.
    pub name: TableName,
    /// Grid size at every level past the root.
    pub grid_size: usize,
    /// Number of time steps.
    pub n: usize,
    /// Newton iterations per level.
    pub nr_iters: usize,
    /// Monte Carlo paths per row.
    pub paths: u64,
    /// Monte Carlo seed.
    pub seed: u64,
    /// Worker threads for path simulation (`None`: global pool).
    pub threads: Option<usize>,
    /// Restrict to these first-column values.
    pub rows: Option<Vec<f64>>,
}

impl TableRequest {
    /// The standard run of a table.
    pub fn new(name: TableName) -> Self {
        Self {
            name,
            grid_size: 400,
            n: 120,
            nr_iters: 5,
            paths: 100_000,
            seed: 42,
            threads: None,
            rows: None,
        }
    }

    fn selected_rows(&self) -> Vec<f64> {
        let all = self.name.default_rows();
        match &self.rows {
            None => all.to_vec(),
            Some(want) => all
                .iter()
                .copied()
                .filter(|v| want.iter().any(|w| (w - v).abs() < 1e-9))
                .collect(),
        }
    }
}

/// One computed table row.
#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    /// First-column value (ϑ, strike, or σ).
    pub label: f64,
    /// Price from the quantization tree.
    pub rmq: f64,
    /// Monte Carlo baseline.
    pub mc: McResult,
    /// Closed-form price where one exists.
    pub closed_form: Option<f64>,
}

const RATE: f64 = 0.15;
const SPOT: f64 = 100.0;
const HORIZON: f64 = 1.0;
const BASE_STRIKE: f64 = 100.0;
const CEV_DELTA: f64 = 0.5;
const CEV_THETA_FIXED: f64 = 4.0;
const BS_SIGMA_FIXED: f64 = 0.4;

fn equal_sizes(n: usize, grid_size: usize) -> Vec<usize> {
    let mut sizes = vec![grid_size; n + 1];
    sizes[0] = 1;
    sizes
}

fn table_tree(req: &TableRequest, spec: ModelSpec) -> Result<QuantizationTree> {
    build_from_request(&BuildRequest {
        model: spec,
        x0: SPOT,
        t_end: HORIZON,
        n: req.n,
        budget: BudgetSpec::Sizes(equal_sizes(req.n, req.grid_size)),
        nr_iters: req.nr_iters,
        keep_transitions: false,
    })
}

/// Runs a benchmark table: one tree per varying model row, or one shared
/// tree repriced across strikes, with a Monte Carlo baseline per row.
pub fn run_table(req: &TableRequest) -> Result<Vec<TableRow>> {
    let labels = req.selected_rows();
    if labels.is_empty() {
        bail!("no table rows selected");
    }
    let mut rows = Vec::with_capacity(labels.len());
    match req.name {
        TableName::Table1 | TableName::Table3 => {
            let payoff = Payoff::put(BASE_STRIKE)?;
            for &label in &labels {
                let spec = match req.name {
                    TableName::Table1 => ModelSpec::PseudoCev {
                        r: RATE,
                        theta: label,
                        delta: CEV_DELTA,
                    },
                    _ => ModelSpec::BlackScholes { r: RATE, sigma: label },
                };
                let tree = table_tree(req, spec)?;
                let rmq = price_european(&tree, &payoff, RATE)?;
                let model = spec.to_model()?;
                let terminals =
                    mc_terminals(&model, SPOT, HORIZON, req.n, req.paths, req.seed, req.threads)?;
                let mc = summarize_terminals(&terminals, &payoff, RATE, HORIZON, req.seed)?;
                let closed_form = match req.name {
                    TableName::Table3 => {
                        Some(bs_put_closed_form(SPOT, BASE_STRIKE, RATE, label, HORIZON)?)
                    }
                    _ => None,
                };
                eprintln!(
                    "{}={label}: rmq {rmq:.6}, mc {:.6} ± {:.6}",
                    req.name.first_column(),
                    mc.price,
                    mc.std_error
                );
                rows.push(TableRow { label, rmq, mc, closed_form });
            }
        }
        TableName::Table2 | TableName::Table4 => {
            let spec = match req.name {
                TableName::Table2 => ModelSpec::PseudoCev {
                    r: RATE,
                    theta: CEV_THETA_FIXED,
                    delta: CEV_DELTA,
                },
                _ => ModelSpec::BlackScholes { r: RATE, sigma: BS_SIGMA_FIXED },
            };
            let tree = table_tree(req, spec)?;
            let model = spec.to_model()?;
            let terminals =
                mc_terminals(&model, SPOT, HORIZON, req.n, req.paths, req.seed, req.threads)?;
            for &strike in &labels {
                let payoff = Payoff::put(strike)?;
                let rmq = price_european(&tree, &payoff, RATE)?;
                let mc = summarize_terminals(&terminals, &payoff, RATE, HORIZON, req.seed)?;
                let closed_form = match req.name {
                    TableName::Table4 => {
                        Some(bs_put_closed_form(SPOT, strike, RATE, BS_SIGMA_FIXED, HORIZON)?)
                    }
                    _ => None,
                };
                eprintln!(
                    "strike={strike}: rmq {rmq:.6}, mc {:.6} ± {:.6}",
                    mc.price, mc.std_error
                );
                rows.push(TableRow { label: strike, rmq, mc, closed_form });
            }
        }
    }
    Ok(rows)
}
