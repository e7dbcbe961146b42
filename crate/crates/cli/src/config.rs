//! Run configuration: TOML files mirrored by command-line flags.
//!
//! A configuration file is a flat TOML document whose keys match the long
//! flag names (for example `model = "pseudo-cev"`, `theta = 4.0`,
//! `budget = "equal:48000"`). Precedence, highest first: command-line flag,
//! configuration file, built-in default.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::document::ModelSpec;
use rmq_core::bounds::{brownian_a_vector, a_coeff, BoundParams};
use rmq_core::model::{DiffusionModel, ModelKind};
use rmq_core::tree::{dispatch_equal, dispatch_optimal};

/// Optional values loadable from a TOML file; any command-line flag with the
/// same name overrides the file entry.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Model name: `brownian`, `black-scholes`, or `pseudo-cev`.
    pub model: Option<String>,
    /// Drift rate.
    pub r: Option<f64>,
    /// Black-Scholes volatility.
    pub sigma: Option<f64>,
    /// Pseudo-CEV volatility scale.
    pub theta: Option<f64>,
    /// Pseudo-CEV volatility exponent.
    pub delta: Option<f64>,
    /// Starting value.
    pub x0: Option<f64>,
    /// Horizon.
    pub t: Option<f64>,
    /// Number of time steps.
    pub n: Option<usize>,
    /// Budget spec, e.g. `equal:48000`, `optimal:3000`, or `sizes:1,400,400`.
    pub budget: Option<String>,
    /// Newton iterations per level.
    pub nr_iters: Option<usize>,
    /// Payoff name: `put` or `call`.
    pub payoff: Option<String>,
    /// Payoff strike.
    pub strike: Option<f64>,
    /// Discount rate (defaults to the model's drift rate).
    pub r_discount: Option<f64>,
    /// Monte Carlo path count.
    pub paths: Option<u64>,
    /// Monte Carlo seed.
    pub seed: Option<u64>,
    /// Worker threads for path simulation.
    pub threads: Option<usize>,
    /// Output file.
    pub out: Option<PathBuf>,
}

/// Loads a configuration file, or an empty configuration when no path is
/// given.
pub fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cfg: FileConfig =
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            Ok(cfg)
        }
    }
}

/// Takes the flag value when present, else the file value.
pub fn prefer<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Resolves a model from merged name and parameters.
///
/// `black-scholes` requires `r` and `sigma`; `pseudo-cev` requires `r`,
/// `theta`, and `delta`; `brownian` takes no parameters.
pub fn resolve_model(
    name: Option<&str>,
    r: Option<f64>,
    sigma: Option<f64>,
    theta: Option<f64>,
    delta: Option<f64>,
) -> Result<ModelSpec> {
    let Some(name) = name else {
        bail!("no model selected: pass --model or set `model` in the configuration file");
    };
    match name {
        "brownian" => Ok(ModelSpec::Brownian),
        "black-scholes" => {
            let r = r.ok_or_else(|| anyhow::anyhow!("black-scholes needs --r"))?;
            let sigma = sigma.ok_or_else(|| anyhow::anyhow!("black-scholes needs --sigma"))?;
            Ok(ModelSpec::BlackScholes { r, sigma })
        }
        "pseudo-cev" => {
            let r = r.ok_or_else(|| anyhow::anyhow!("pseudo-cev needs --r"))?;
            let theta = theta.ok_or_else(|| anyhow::anyhow!("pseudo-cev needs --theta"))?;
            let delta = delta.ok_or_else(|| anyhow::anyhow!("pseudo-cev needs --delta"))?;
            Ok(ModelSpec::PseudoCev { r, theta, delta })
        }
        other => bail!("unknown model {other:?}: expected brownian, black-scholes, or pseudo-cev"),
    }
}

/// How a total point budget turns into per-level grid sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BudgetSpec {
    /// `equal:N` — N split evenly over levels 1..=n.
    Equal(usize),
    /// `optimal:N` — N split by the error-bound coefficients a_ℓ^{d/(d+1)}.
    Optimal(usize),
    /// `sizes:1,400,400,…` — explicit per-level sizes (length n+1).
    Sizes(Vec<usize>),
}

impl FromStr for BudgetSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (scheme, rest) = s
            .split_once(':')
            .ok_or_else(|| anyhow::anyhow!("budget {s:?}: expected scheme:value, e.g. equal:48000"))?;
        match scheme {
            "equal" | "optimal" => {
                let n: usize = rest
                    .parse()
                    .with_context(|| format!("budget {s:?}: bad total {rest:?}"))?;
                if scheme == "equal" {
                    Ok(BudgetSpec::Equal(n))
                } else {
                    Ok(BudgetSpec::Optimal(n))
                }
            }
            "sizes" => {
                let sizes: Vec<usize> = rest
                    .split(',')
                    .map(|part| {
                        part.trim()
                            .parse()
                            .with_context(|| format!("budget {s:?}: bad size {part:?}"))
                    })
                    .collect::<Result<_>>()?;
                Ok(BudgetSpec::Sizes(sizes))
            }
            other => bail!("budget {s:?}: unknown scheme {other:?} (equal, optimal, or sizes)"),
        }
    }
}

/// Expands a budget spec into the per-level grid sizes for an n-step tree.
///
/// The optimal scheme uses the Brownian closed-form coefficients for the
/// Brownian model and the general error-bound coefficients a_ℓ(T) otherwise.
pub fn resolve_sizes(
    spec: &BudgetSpec,
    model: &DiffusionModel,
    x0: f64,
    t_end: f64,
    n: usize,
) -> Result<Vec<usize>> {
    if n == 0 {
        bail!("need at least one time step");
    }
    let dt = t_end / n as f64;
    match spec {
        BudgetSpec::Equal(total) => Ok(dispatch_equal(*total, n)?),
        BudgetSpec::Optimal(total) => {
            let a = if model.kind() == ModelKind::Brownian {
                brownian_a_vector(n, dt)?
            } else {
                let params = BoundParams::for_model(model, x0, dt);
                let mut a = vec![1.0; n + 1];
                for (ell, slot) in a.iter_mut().enumerate().skip(1) {
                    *slot = a_coeff(ell, t_end, &params)?;
                }
                a
            };
            Ok(dispatch_optimal(&a, *total, 1)?)
        }
        BudgetSpec::Sizes(sizes) => {
            if sizes.len() != n + 1 {
                bail!(
                    "budget sizes: expected n+1 = {} entries, found {}",
                    n + 1,
                    sizes.len()
                );
            }
            Ok(sizes.clone())
        }
    }
}

/// Parses a budget sweep: a single total (`400`), a comma list
/// (`250,500,1000`), or an inclusive start:end:step range (`250:5000:50`).
pub fn parse_budget_list(s: &str) -> Result<Vec<usize>> {
    if let Some((start, rest)) = s.split_once(':') {
        let (end, step) = rest
            .split_once(':')
            .ok_or_else(|| anyhow::anyhow!("budgets {s:?}: expected start:end:step"))?;
        let start: usize = start.parse().with_context(|| format!("budgets {s:?}"))?;
        let end: usize = end.parse().with_context(|| format!("budgets {s:?}"))?;
        let step: usize = step.parse().with_context(|| format!("budgets {s:?}"))?;
        if step == 0 {
            bail!("budgets {s:?}: step must be positive");
        }
        if end < start {
            bail!("budgets {s:?}: end below start");
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        s.split(',')
            .map(|part| {
                part.trim()
                    .parse()
                    .with_context(|| format!("budgets {s:?}: bad entry {part:?}"))
            })
            .collect()
    }
}
