//! `rmq`: recursive marginal quantization of one-dimensional diffusions.
//!
//! Subcommands: `build`, `price`, `mc-price`, `normal-grid`, `bounds`,
//! `dispatch`, `compare-brownian`, `table`. Run `rmq <COMMAND> --help` for
//! the flags of each. Commands that take many numeric parameters also
//! accept `--config file.toml`; flags override file values.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rmq_cli::config::{
    load_config, parse_budget_list, prefer, resolve_model, resolve_sizes, BudgetSpec, FileConfig,
};
use rmq_cli::csvio::{
    write_compare_csv, write_dispatch_csv, write_normal_grid_csv, write_table_csv,
    write_tree_grids_csv,
};
use rmq_cli::document::{read_tree, write_tree, ModelSpec};
use rmq_cli::parallel::mc_price_parallel;
use rmq_cli::runs::{
    bounds_report, brownian_comparison, build_from_request, price_report, run_table, BuildRequest,
    TableName, TableRequest,
};
use rmq_core::bounds::AllocReading;
use rmq_core::gaussian::std_normal_quantizer;
use rmq_core::model::ModelKind;
use rmq_core::pricing::Payoff;

#[derive(Parser)]
#[command(
    name = "rmq",
    version,
    about = "Recursive marginal quantization of one-dimensional diffusions: \
             optimal grids, transition weights, error bounds, and option pricing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a quantization tree and write it as JSON.
    Build(BuildArgs),
    /// Price a European payoff on a stored tree.
    Price(PriceArgs),
    /// Price by seeded Euler-scheme Monte Carlo.
    McPrice(McPriceArgs),
    /// Write an optimal standard-normal quantizer as CSV.
    NormalGrid(NormalGridArgs),
    /// Print error-bound constants and the cumulative bound.
    Bounds(BoundsArgs),
    /// Print grid-size schedules across levels as CSV.
    Dispatch(DispatchArgs),
    /// Sweep Brownian budgets against regular quantization (CSV).
    CompareBrownian(CompareArgs),
    /// Reproduce a benchmark table as CSV.
    Table(TableArgs),
}

/// Model selection flags shared by several commands.
#[derive(Args, Clone)]
struct ModelArgs {
    /// Model name: brownian, black-scholes, or pseudo-cev.
    #[arg(long)]
    model: Option<String>,
    /// Drift rate r (black-scholes, pseudo-cev).
    #[arg(long)]
    r: Option<f64>,
    /// Volatility sigma (black-scholes).
    #[arg(long)]
    sigma: Option<f64>,
    /// Volatility scale theta (pseudo-cev).
    #[arg(long)]
    theta: Option<f64>,
    /// Volatility exponent delta in (0,1) (pseudo-cev).
    #[arg(long)]
    delta: Option<f64>,
}

impl ModelArgs {
    fn resolve(&self, file: &FileConfig) -> Result<ModelSpec> {
        resolve_model(
            prefer(self.model.as_deref(), file.model.as_deref()),
            prefer(self.r, file.r),
            prefer(self.sigma, file.sigma),
            prefer(self.theta, file.theta),
            prefer(self.delta, file.delta),
        )
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Starting value.
    #[arg(long)]
    x0: Option<f64>,
    /// Horizon T.
    #[arg(long = "t")]
    t_end: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    n: Option<usize>,
    /// Point budget: equal:N, optimal:N, or sizes:1,400,400,…
    #[arg(long)]
    budget: Option<BudgetSpec>,
    /// Newton iterations per level.
    #[arg(long)]
    nr_iters: Option<usize>,
    /// Drop transition matrices after weight propagation.
    #[arg(long)]
    drop_transitions: bool,
    /// Output JSON file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump every grid as CSV (level,index,x,weight) to this file.
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PriceArgs {
    /// Tree JSON file produced by `build`.
    #[arg(long)]
    tree: PathBuf,
    /// Payoff kind.
    #[arg(long, value_enum)]
    payoff: Option<PayoffKind>,
    /// Payoff strike.
    #[arg(long)]
    strike: Option<f64>,
    /// Discount rate (defaults to the model's drift rate).
    #[arg(long)]
    r: Option<f64>,
    /// Also print the pricing-error bound for this payoff Lipschitz
    /// constant.
    #[arg(long)]
    bound_lip: Option<f64>,
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct McPriceArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Starting value.
    #[arg(long)]
    x0: Option<f64>,
    /// Horizon T.
    #[arg(long = "t")]
    t_end: Option<f64>,
    /// Number of Euler steps.
    #[arg(long)]
    n: Option<usize>,
    /// Payoff kind.
    #[arg(long, value_enum)]
    payoff: Option<PayoffKind>,
    /// Payoff strike.
    #[arg(long)]
    strike: Option<f64>,
    /// Discount rate (defaults to the model's drift rate).
    #[arg(long)]
    r_discount: Option<f64>,
    /// Number of paths.
    #[arg(long)]
    paths: Option<u64>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per CPU).
    #[arg(long)]
    threads: Option<usize>,
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct NormalGridArgs {
    /// Number of grid points.
    n: usize,
    /// Newton iterations.
    #[arg(long, default_value_t = 60)]
    nr_iters: usize,
    /// Output CSV file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Starting value.
    #[arg(long)]
    x0: Option<f64>,
    /// Horizon T.
    #[arg(long = "t")]
    t_end: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    n: Option<usize>,
    /// Point budget: equal:N, optimal:N, or sizes:…
    #[arg(long)]
    budget: Option<BudgetSpec>,
    /// Level at which to evaluate the bound (default: n).
    #[arg(long)]
    k: Option<usize>,
    /// Moment order in (2,3].
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    /// Universal quantization constant scaling the bound.
    #[arg(long, default_value_t = 1.0)]
    k_universal: f64,
    /// Which reading of the per-level coefficients to use.
    #[arg(long, value_enum, default_value_t = ReadingArg::Statement)]
    reading: ReadingArg,
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DispatchArgs {
    /// Use the Brownian closed-form coefficients.
    #[arg(long)]
    brownian: bool,
    #[command(flatten)]
    model: ModelArgs,
    /// Starting value (general models).
    #[arg(long)]
    x0: Option<f64>,
    /// Horizon T.
    #[arg(long = "t", default_value_t = 1.0)]
    t_end: f64,
    /// Number of time steps.
    #[arg(long)]
    n: usize,
    /// Budgets: a total (400), a list (250,500), or start:end:step.
    #[arg(long)]
    budgets: String,
    /// Dispatching scheme.
    #[arg(long, value_enum, default_value_t = SchemeArg::Optimal)]
    scheme: SchemeArg,
    /// Output CSV file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Number of time steps.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Budgets: a total, a list, or start:end:step.
    #[arg(long, default_value = "250:5000:50")]
    budgets: String,
    /// Newton iterations per level.
    #[arg(long, default_value_t = 5)]
    nr_iters: usize,
    /// Output CSV file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Which table to reproduce.
    #[arg(long, value_enum)]
    name: TableNameArg,
    /// Grid size at every level past the root.
    #[arg(long, default_value_t = 400)]
    grid_size: usize,
    /// Number of time steps.
    #[arg(long, default_value_t = 120)]
    n: usize,
    /// Newton iterations per level.
    #[arg(long, default_value_t = 5)]
    nr_iters: usize,
    /// Monte Carlo paths per row.
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads for path simulation.
    #[arg(long)]
    threads: Option<usize>,
    /// Restrict to these first-column values (comma list).
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<f64>>,
    /// Output CSV file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PayoffKind {
    /// (K − x)⁺
    Put,
    /// (x − K)⁺
    Call,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReadingArg {
    /// Transport factor e^{C(t_k−t_ℓ)/p}.
    Statement,
    /// Transport factor e^{C(t_k−t_ℓ)}.
    Proof,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Equal,
    Optimal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableNameArg {
    Table1,
    Table2,
    Table3,
    Table4,
}

impl From<TableNameArg> for TableName {
    fn from(arg: TableNameArg) -> Self {
        match arg {
            TableNameArg::Table1 => TableName::Table1,
            TableNameArg::Table2 => TableName::Table2,
            TableNameArg::Table3 => TableName::Table3,
            TableNameArg::Table4 => TableName::Table4,
        }
    }
}

/// Opens `--out` for writing, or stdout when absent.
fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(f))
        }
        None => Ok(Box::new(io::stdout())),
    }
}

fn resolve_payoff(
    kind: Option<PayoffKind>,
    strike: Option<f64>,
    file: &FileConfig,
) -> Result<Payoff> {
    let kind = match kind {
        Some(k) => k,
        None => match file.payoff.as_deref() {
            Some("put") => PayoffKind::Put,
            Some("call") => PayoffKind::Call,
            Some(other) => bail!("unknown payoff {other:?}: expected put or call"),
            None => bail!("no payoff selected: pass --payoff or set `payoff` in the config"),
        },
    };
    let strike = prefer(strike, file.strike)
        .ok_or_else(|| anyhow::anyhow!("no strike given: pass --strike or set `strike`"))?;
    Ok(match kind {
        PayoffKind::Put => Payoff::put(strike)?,
        PayoffKind::Call => Payoff::call(strike)?,
    })
}

/// The model's own drift rate, as the default discount rate.
fn model_rate(kind: ModelKind) -> f64 {
    match kind {
        ModelKind::Brownian | ModelKind::Custom => 0.0,
        ModelKind::BlackScholes { rate, .. } | ModelKind::PseudoCev { rate, .. } => rate,
    }
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let file = load_config(args.config.as_deref())?;
    let spec = args.model.resolve(&file)?;
    let budget = match prefer(args.budget, file.budget.as_deref().map(str::parse).transpose()?) {
        Some(b) => b,
        None => bail!("no budget given: pass --budget or set `budget` in the config"),
    };
    let req = BuildRequest {
        model: spec,
        x0: prefer(args.x0, file.x0)
            .ok_or_else(|| anyhow::anyhow!("no starting value: pass --x0 or set `x0`"))?,
        t_end: prefer(args.t_end, file.t).unwrap_or(1.0),
        n: prefer(args.n, file.n)
            .ok_or_else(|| anyhow::anyhow!("no step count: pass --n or set `n`"))?,
        budget,
        nr_iters: prefer(args.nr_iters, file.nr_iters).unwrap_or(5),
        keep_transitions: !args.drop_transitions,
    };
    let tree = build_from_request(&req)?;
    let out = match prefer(args.out, file.out) {
        Some(p) => p,
        None => bail!("no output file: pass --out or set `out`"),
    };
    write_tree(&out, &tree)?;
    if let Some(csv_path) = &args.csv_out {
        let f = File::create(csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?;
        write_tree_grids_csv(f, &tree)?;
    }
    let terminal = tree.terminal();
    eprintln!(
        "built {} levels (terminal size {}, residual {:.3e}); wrote {}",
        tree.levels.len(),
        terminal.grid.len(),
        terminal.newton_residual,
        out.display()
    );
    Ok(())
}

fn cmd_price(args: PriceArgs) -> Result<()> {
    let file = load_config(args.config.as_deref())?;
    let tree = read_tree(&args.tree)?;
    let payoff = resolve_payoff(args.payoff, args.strike, &file)?;
    let r = prefer(args.r, file.r_discount).unwrap_or_else(|| model_rate(tree.model_kind));
    let (price, bound) = price_report(&tree, &payoff, r, args.bound_lip)?;
    println!("price,{price}");
    if let Some(b) = bound {
        println!("error_bound,{b}");
    }
    Ok(())
}

fn cmd_mc_price(args: McPriceArgs) -> Result<()> {
    let file = load_config(args.config.as_deref())?;
    let spec = args.model.resolve(&file)?;
    let model = spec.to_model()?;
    let payoff = resolve_payoff(args.payoff, args.strike, &file)?;
    let x0 = prefer(args.x0, file.x0)
        .ok_or_else(|| anyhow::anyhow!("no starting value: pass --x0 or set `x0`"))?;
    let t_end = prefer(args.t_end, file.t).unwrap_or(1.0);
    let n = prefer(args.n, file.n)
        .ok_or_else(|| anyhow::anyhow!("no step count: pass --n or set `n`"))?;
    let r = prefer(args.r_discount, file.r_discount).unwrap_or_else(|| model_rate(model.kind()));
    let paths = prefer(args.paths, file.paths).unwrap_or(1_000_000);
    let seed = prefer(args.seed, file.seed).unwrap_or(42);
    let threads = prefer(args.threads, file.threads);
    let result = mc_price_parallel(&model, x0, &payoff, r, t_end, n, paths, seed, threads)?;
    println!("price,std_error,ci_low,ci_high,paths,seed");
    println!(
        "{},{},{},{},{},{}",
        result.price, result.std_error, result.ci_low, result.ci_high, result.paths, result.seed
    );
    Ok(())
}

fn cmd_normal_grid(args: NormalGridArgs) -> Result<()> {
    let q = std_normal_quantizer(args.n, args.nr_iters)?;
    write_normal_grid_csv(open_out(args.out.as_ref())?, &q)?;
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let file = load_config(args.config.as_deref())?;
    let spec = args.model.resolve(&file)?;
    let model = spec.to_model()?;
    let x0 = prefer(args.x0, file.x0)
        .ok_or_else(|| anyhow::anyhow!("no starting value: pass --x0 or set `x0`"))?;
    let t_end = prefer(args.t_end, file.t).unwrap_or(1.0);
    let n = prefer(args.n, file.n)
        .ok_or_else(|| anyhow::anyhow!("no step count: pass --n or set `n`"))?;
    let budget = match prefer(args.budget, file.budget.as_deref().map(str::parse).transpose()?) {
        Some(b) => b,
        None => bail!("no budget given: pass --budget or set `budget` in the config"),
    };
    let sizes = resolve_sizes(&budget, &model, x0, t_end, n)?;
    let k = args.k.unwrap_or(n);
    let reading = match args.reading {
        ReadingArg::Statement => AllocReading::Statement,
        ReadingArg::Proof => AllocReading::Proof,
    };
    let report = bounds_report(&model, x0, t_end, n, &sizes, k, args.p, args.k_universal, reading)?;
    println!("p,{}", report.p);
    println!("kappa_p,{}", report.kappa_p);
    println!("big_k_p,{}", report.big_k_p);
    println!("c_b_sigma,{}", report.c_b_sigma);
    println!("a_uniform,{}", report.a_uniform);
    println!("bound,{}", report.bound);
    Ok(())
}

fn cmd_dispatch(args: DispatchArgs) -> Result<()> {
    let budgets = parse_budget_list(&args.budgets)?;
    let (model, x0) = if args.brownian {
        (rmq_core::model::DiffusionModel::brownian(), 0.0)
    } else {
        let spec = args.model.resolve(&FileConfig::default())?;
        let x0 = args
            .x0
            .ok_or_else(|| anyhow::anyhow!("general models need --x0 for the coefficients"))?;
        (spec.to_model()?, x0)
    };
    let mut schedules = Vec::with_capacity(budgets.len());
    for &budget in &budgets {
        let spec = match args.scheme {
            SchemeArg::Equal => BudgetSpec::Equal(budget),
            SchemeArg::Optimal => BudgetSpec::Optimal(budget),
        };
        schedules.push((budget, resolve_sizes(&spec, &model, x0, args.t_end, args.n)?));
    }
    write_dispatch_csv(open_out(args.out.as_ref())?, &schedules)?;
    Ok(())
}

fn cmd_compare_brownian(args: CompareArgs) -> Result<()> {
    let budgets = parse_budget_list(&args.budgets)?;
    let rows = brownian_comparison(args.n, &budgets, args.nr_iters)?;
    write_compare_csv(open_out(args.out.as_ref())?, &rows)?;
    Ok(())
}

fn cmd_table(args: TableArgs) -> Result<()> {
    let req = TableRequest {
        name: args.name.into(),
        grid_size: args.grid_size,
        n: args.n,
        nr_iters: args.nr_iters,
        paths: args.paths,
        seed: args.seed,
        threads: args.threads,
        rows: args.rows,
    };
    let rows = run_table(&req)?;
    write_table_csv(open_out(args.out.as_ref())?, req.name.first_column(), &rows)?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Build(args) => cmd_build(args),
        Command::Price(args) => cmd_price(args),
        Command::McPrice(args) => cmd_mc_price(args),
        Command::NormalGrid(args) => cmd_normal_grid(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Dispatch(args) => cmd_dispatch(args),
        Command::CompareBrownian(args) => cmd_compare_brownian(args),
        Command::Table(args) => cmd_table(args),
    }
}
