//! JSON documents for quantization trees.
//!
//! A tree is stored as a single JSON object:
//!
//! ```json
//! {
//!   "model": { "name": "black-scholes", "r": 0.15, "sigma": 0.4 },
//!   "x0": 100.0,
//!   "T": 1.0,
//!   "n": 120,
//!   "levels": [
//!     { "t": 0.0, "grid": [100.0], "weights": [1.0], "transition": null },
//!     { "t": 0.008333333333333333, "grid": [...], "weights": [...],
//!       "transition": [[...], ...] }
//!   ]
//! }
//! ```
//!
//! `levels[k].transition` holds the transition matrix from level k−1 into
//! level k (`null` at the root, and at every level when the tree was built
//! without stored transitions). Reals are written as the shortest decimal
//! string that parses back to the identical `f64`, so a serialize/parse
//! round trip reproduces every number bit for bit.
//!
//! Parsing validates the schema and the probabilistic invariants; every
//! failure message names the JSON path of the offending value (for example
//! `levels[3].weights: sum 0.9 deviates from 1 …`). Solver diagnostics
//! (residuals, iteration counts, distortions) are not part of the document
//! and reset to zero on parse.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rmq_core::model::{DiffusionModel, ModelKind};
use rmq_core::tree::{Level, QuantizationTree};

/// Tolerance on stored probability sums (weight vectors and transition
/// rows). Built trees satisfy 1e-12; the slack covers decimal round trips
/// through other tools.
pub const MASS_TOL: f64 = 1e-10;

/// Serializable model selection: a name plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Standard Brownian motion: zero drift, unit volatility.
    Brownian,
    /// Geometric Brownian motion: drift r·x, volatility sigma·x.
    BlackScholes {
        /// Drift rate.
        r: f64,
        /// Volatility coefficient (positive).
        sigma: f64,
    },
    /// Bounded-volatility CEV stand-in: drift r·x, volatility
    /// theta·|x|^{delta+1}/√(1+x²).
    PseudoCev {
        /// Drift rate.
        r: f64,
        /// Volatility scale (positive).
        theta: f64,
        /// Volatility exponent in (0, 1).
        delta: f64,
    },
}

impl ModelSpec {
    /// The serializable form of a model kind; user-supplied coefficient
    /// functions have none.
    pub fn from_kind(kind: ModelKind) -> Result<Self> {
        match kind {
            ModelKind::Brownian => Ok(ModelSpec::Brownian),
            ModelKind::BlackScholes { rate, sigma } => Ok(ModelSpec::BlackScholes { r: rate, sigma }),
            ModelKind::PseudoCev { rate, theta, delta } => {
                Ok(ModelSpec::PseudoCev { r: rate, theta, delta })
            }
            ModelKind::Custom => {
                bail!("model: custom coefficient functions have no serialized form")
            }
        }
    }

    /// The corresponding model kind tag.
    pub fn kind(&self) -> ModelKind {
        match *self {
            ModelSpec::Brownian => ModelKind::Brownian,
            ModelSpec::BlackScholes { r, sigma } => ModelKind::BlackScholes { rate: r, sigma },
            ModelSpec::PseudoCev { r, theta, delta } => {
                ModelKind::PseudoCev { rate: r, theta, delta }
            }
        }
    }

    /// Instantiates the model, validating its parameters.
    pub fn to_model(&self) -> Result<DiffusionModel> {
        let model = match *self {
            ModelSpec::Brownian => DiffusionModel::brownian(),
            ModelSpec::BlackScholes { r, sigma } => {
                DiffusionModel::black_scholes(r, sigma).context("model")?
            }
            ModelSpec::PseudoCev { r, theta, delta } => {
                DiffusionModel::pseudo_cev(r, theta, delta).context("model")?
            }
        };
        Ok(model)
    }
}

/// One level of the stored tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDoc {
    /// Time of the level.
    pub t: f64,
    /// Grid points, strictly increasing.
    pub grid: Vec<f64>,
    /// Point masses, matching `grid` in length and summing to 1.
    pub weights: Vec<f64>,
    /// Transition matrix from the previous level (rows indexed by the
    /// previous grid), or `null` when absent.
    pub transition: Option<Vec<Vec<f64>>>,
}

/// The complete stored tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    /// Model the tree discretizes.
    pub model: ModelSpec,
    /// Starting value.
    pub x0: f64,
    /// Horizon.
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Number of time steps; the tree has n+1 levels.
    pub n: usize,
    /// Levels 0..=n.
    pub levels: Vec<LevelDoc>,
}

/// Converts a tree into its document form.
pub fn tree_to_doc(tree: &QuantizationTree) -> Result<TreeDoc> {
    Ok(TreeDoc {
        model: ModelSpec::from_kind(tree.model_kind)?,
        x0: tree.x0,
        t_end: tree.t_end,
        n: tree.n_steps,
        levels: tree
            .levels
            .iter()
            .map(|level| LevelDoc {
                t: level.t,
                grid: level.grid.clone(),
                weights: level.weights.clone(),
                transition: level.transition_from_prev.clone(),
            })
            .collect(),
    })
}

/// Validates a document and converts it into a tree.
///
/// Checks, with the JSON path in every failure: model parameters, the
/// uniform time mesh, strictly increasing finite grids, nonnegative weights
/// summing to 1 within [`MASS_TOL`], and transition matrices whose shape
/// matches the adjacent grids with rows summing to 1 within [`MASS_TOL`].
pub fn doc_to_tree(doc: TreeDoc) -> Result<QuantizationTree> {
    doc.model.to_model()?;
    if !doc.x0.is_finite() {
        bail!("x0: must be finite, got {}", doc.x0);
    }
    if !(doc.t_end > 0.0 && doc.t_end.is_finite()) {
        bail!("T: must be positive and finite, got {}", doc.t_end);
    }
    if doc.n == 0 {
        bail!("n: must be at least 1");
    }
    if doc.levels.len() != doc.n + 1 {
        bail!(
            "levels: expected n+1 = {} entries, found {}",
            doc.n + 1,
            doc.levels.len()
        );
    }
    let dt = doc.t_end / doc.n as f64;
    let t_tol = 1e-9 * doc.t_end.max(1.0);
    let mut levels = Vec::with_capacity(doc.levels.len());
    let mut prev_len = 0usize;
    for (k, level) in doc.levels.into_iter().enumerate() {
        let expected_t = k as f64 * dt;
        if !level.t.is_finite() || (level.t - expected_t).abs() > t_tol {
            bail!(
                "levels[{k}].t: expected the uniform mesh value {expected_t}, got {}",
                level.t
            );
        }
        validate_grid(k, &level.grid)?;
        if k == 0 {
            if level.grid.len() != 1 || level.grid[0] != doc.x0 {
                bail!("levels[0].grid: expected the single starting point x0 = {}", doc.x0);
            }
            if level.transition.is_some() {
                bail!("levels[0].transition: the root has no predecessor; expected null");
            }
        }
        validate_weights(k, &level.weights, level.grid.len())?;
        if let Some(rows) = &level.transition {
            validate_transition(k, rows, prev_len, level.grid.len())?;
        }
        prev_len = level.grid.len();
        levels.push(Level {
            t: level.t,
            grid: level.grid,
            weights: level.weights,
            transition_from_prev: level.transition,
            newton_residual: 0.0,
            newton_iterations: 0,
            distortion: 0.0,
        });
    }
    Ok(QuantizationTree {
        model_kind: doc.model.kind(),
        x0: doc.x0,
        t_end: doc.t_end,
        n_steps: doc.n,
        levels,
    })
}

fn validate_grid(k: usize, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        bail!("levels[{k}].grid: must not be empty");
    }
    for (j, x) in grid.iter().enumerate() {
        if !x.is_finite() {
            bail!("levels[{k}].grid[{j}]: must be finite, got {x}");
        }
    }
    for j in 1..grid.len() {
        if grid[j] <= grid[j - 1] {
            bail!("levels[{k}].grid: not strictly increasing at index {j}");
        }
    }
    Ok(())
}

fn validate_weights(k: usize, weights: &[f64], grid_len: usize) -> Result<()> {
    if weights.len() != grid_len {
        bail!(
            "levels[{k}].weights: expected {grid_len} entries to match the grid, found {}",
            weights.len()
        );
    }
    let mut sum = 0.0;
    for (j, w) in weights.iter().enumerate() {
        if !(*w >= 0.0 && w.is_finite()) {
            bail!("levels[{k}].weights[{j}]: must be finite and nonnegative, got {w}");
        }
        sum += w;
    }
    if (sum - 1.0).abs() > MASS_TOL {
        bail!(
            "levels[{k}].weights: sum {sum} deviates from 1 by {:e}",
            (sum - 1.0).abs()
        );
    }
    Ok(())
}

fn validate_transition(k: usize, rows: &[Vec<f64>], prev_len: usize, grid_len: usize) -> Result<()> {
    if rows.len() != prev_len {
        bail!(
            "levels[{k}].transition: expected {prev_len} rows to match the previous grid, found {}",
            rows.len()
        );
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != grid_len {
            bail!(
                "levels[{k}].transition[{i}]: expected {grid_len} entries to match the grid, found {}",
                row.len()
            );
        }
        let mut sum = 0.0;
        for (j, p) in row.iter().enumerate() {
            if !(*p >= 0.0 && p.is_finite()) {
                bail!(
                    "levels[{k}].transition[{i}][{j}]: must be finite and nonnegative, got {p}"
                );
            }
            sum += p;
        }
        if (sum - 1.0).abs() > MASS_TOL {
            bail!("levels[{k}].transition[{i}]: row sums to {sum}, not 1");
        }
    }
    Ok(())
}

/// Serializes a tree to pretty-printed JSON (trailing newline included).
pub fn serialize_tree(tree: &QuantizationTree) -> Result<String> {
    let doc = tree_to_doc(tree)?;
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

/// Parses a JSON document into a validated tree.
///
/// Structural errors (missing or mistyped fields) and invariant violations
/// both report the JSON path of the offending value.
pub fn parse_tree(json: &str) -> Result<QuantizationTree> {
    let mut de = serde_json::Deserializer::from_str(json);
    let doc: TreeDoc = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| anyhow::anyhow!("{}: {}", e.path(), e.inner()))?;
    doc_to_tree(doc)
}

/// Writes a tree to a JSON file.
pub fn write_tree(path: &Path, tree: &QuantizationTree) -> Result<()> {
    let text = serialize_tree(tree)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Reads and validates a tree from a JSON file.
pub fn read_tree(path: &Path) -> Result<QuantizationTree> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_tree(&text).with_context(|| format!("parsing {}", path.display()))
}
