//! Tests for budget-spec parsing, budget-list parsing, model resolution,
//! grid-size resolution, and TOML config loading/precedence.

use std::io::Write as _;

use rmq_cli::config::{
    load_config, parse_budget_list, prefer, resolve_model, resolve_sizes, BudgetSpec,
    FileConfig,
};
use rmq_cli::document::ModelSpec;
use rmq_core::bounds::brownian_a_vector;
use rmq_core::model::DiffusionModel;
use rmq_core::tree::{dispatch_equal, dispatch_optimal};

#[test]
fn budget_spec_parses_all_three_forms() {
    assert_eq!("equal:500".parse::<BudgetSpec>().unwrap(), BudgetSpec::Equal(500));
    assert_eq!(
        "optimal:1000".parse::<BudgetSpec>().unwrap(),
        BudgetSpec::Optimal(1000)
    );
    assert_eq!(
        "sizes:1,4,8".parse::<BudgetSpec>().unwrap(),
        BudgetSpec::Sizes(vec![1, 4, 8])
    );
}

#[test]
fn budget_spec_rejects_malformed_input() {
    for bad in ["", "equal", "equal:", "equal:x", "sizes:", "sizes:1,,2", "huge:5"] {
        assert!(bad.parse::<BudgetSpec>().is_err(), "accepted {bad:?}");
    }
}

#[test]
fn budget_list_parses_scalars_lists_and_ranges() {
    assert_eq!(parse_budget_list("250").unwrap(), vec![250]);
    assert_eq!(parse_budget_list("100,200,50").unwrap(), vec![100, 200, 50]);
    // Inclusive range with step.
    assert_eq!(
        parse_budget_list("250:1000:250").unwrap(),
        vec![250, 500, 750, 1000]
    );
    // An end that is not on the step grid stops below it.
    assert_eq!(parse_budget_list("10:25:10").unwrap(), vec![10, 20]);
}

#[test]
fn budget_list_rejects_malformed_ranges() {
    for bad in ["", "10:5:1", "10:20:0", "10:20", "a:b:c"] {
        assert!(parse_budget_list(bad).is_err(), "accepted {bad:?}");
    }
}

#[test]
fn resolve_model_builds_each_kind() {
    let b = resolve_model(Some("brownian"), None, None, None, None).unwrap();
    assert_eq!(b, ModelSpec::Brownian);
    let bs = resolve_model(Some("black-scholes"), Some(0.1), Some(0.3), None, None).unwrap();
    assert_eq!(bs, ModelSpec::BlackScholes { r: 0.1, sigma: 0.3 });
    let cev =
        resolve_model(Some("pseudo-cev"), Some(0.1), None, Some(2.0), Some(0.5)).unwrap();
    assert_eq!(cev, ModelSpec::PseudoCev { r: 0.1, theta: 2.0, delta: 0.5 });
}

#[test]
fn resolve_model_names_missing_parameters() {
    let err = resolve_model(Some("black-scholes"), Some(0.1), None, None, None)
        .unwrap_err()
        .to_string();
    assert!(err.contains("sigma"), "message does not name the flag: {err}");
    let err = resolve_model(Some("pseudo-cev"), Some(0.1), None, None, Some(0.5))
        .unwrap_err()
        .to_string();
    assert!(err.contains("theta"), "message does not name the flag: {err}");
    assert!(resolve_model(Some("heston"), None, None, None, None).is_err());
    let err = resolve_model(None, None, None, None, None).unwrap_err().to_string();
    assert!(err.contains("--model"), "message does not name the flag: {err}");
}

#[test]
fn resolve_sizes_equal_matches_dispatcher() {
    let model = DiffusionModel::brownian();
    let sizes = resolve_sizes(&BudgetSpec::Equal(250), &model, 0.0, 1.0, 50).unwrap();
    assert_eq!(sizes, dispatch_equal(250, 50).unwrap());
}

#[test]
fn resolve_sizes_optimal_brownian_matches_dispatcher() {
    let model = DiffusionModel::brownian();
    let n = 50;
    let sizes = resolve_sizes(&BudgetSpec::Optimal(5000), &model, 0.0, 1.0, n).unwrap();
    let a = brownian_a_vector(n, 1.0 / n as f64).unwrap();
    assert_eq!(sizes, dispatch_optimal(&a, 5000, 1).unwrap());
    assert_eq!(*sizes.last().unwrap(), 127);
}

#[test]
fn resolve_sizes_optimal_works_for_drifted_models() {
    let model = DiffusionModel::black_scholes(0.15, 0.4).unwrap();
    let n = 20;
    let sizes = resolve_sizes(&BudgetSpec::Optimal(400), &model, 100.0, 1.0, n).unwrap();
    assert_eq!(sizes.len(), n + 1);
    assert_eq!(sizes[0], 1);
    assert!(sizes[1..].iter().all(|&s| s >= 1));
    assert_eq!(sizes[1..].iter().sum::<usize>(), 400);
    // Later levels face more accumulated variance and earn more points.
    assert!(sizes[n] >= sizes[1]);
}

#[test]
fn resolve_sizes_explicit_list_is_validated() {
    let model = DiffusionModel::brownian();
    let spec = BudgetSpec::Sizes(vec![1, 4, 8]);
    let sizes = resolve_sizes(&spec, &model, 0.0, 1.0, 2).unwrap();
    assert_eq!(sizes, vec![1, 4, 8]);
    assert!(resolve_sizes(&spec, &model, 0.0, 1.0, 3).is_err());
}

#[test]
fn prefer_takes_the_flag_over_the_file() {
    assert_eq!(prefer(Some(1), Some(2)), Some(1));
    assert_eq!(prefer(None, Some(2)), Some(2));
    assert_eq!(prefer::<i32>(None, None), None);
}

#[test]
fn load_config_reads_a_toml_file() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        file,
        "model = \"black-scholes\"\nr = 0.15\nsigma = 0.2\nx0 = 100.0\nt = 1.0\nn = 4\nbudget = \"equal:40\"\nseed = 7"
    )
    .unwrap();
    let cfg = load_config(Some(file.path())).unwrap();
    assert_eq!(cfg.model.as_deref(), Some("black-scholes"));
    assert_eq!(cfg.sigma, Some(0.2));
    assert_eq!(cfg.n, Some(4));
    assert_eq!(cfg.budget.as_deref(), Some("equal:40"));
    assert_eq!(cfg.seed, Some(7));
    assert_eq!(cfg.paths, None);
}

#[test]
fn load_config_defaults_to_empty_without_a_path() {
    let cfg = load_config(None).unwrap();
    assert_eq!(cfg, FileConfig::default());
}

#[test]
fn load_config_rejects_unknown_keys() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "volatility = 0.2").unwrap();
    let err = format!("{:#}", load_config(Some(file.path())).unwrap_err());
    assert!(err.contains("volatility"), "message does not name the key: {err}");
}

#[test]
fn load_config_reports_missing_files() {
    assert!(load_config(Some(std::path::Path::new("/nonexistent/rmq.toml"))).is_err());
}
