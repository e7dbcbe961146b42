//! Round-trip and validation tests for the JSON tree document format.
//!
//! Serialization must round-trip trees exactly (shortest round-trip float
//! formatting guarantees bit-identical reparses), and every malformed
//! document must be rejected with an error that names the offending JSON
//! path.

use rmq_cli::document::{
    doc_to_tree, parse_tree, serialize_tree, tree_to_doc, ModelSpec, TreeDoc,
};
use rmq_core::model::{DiffusionModel, ModelKind};
use rmq_core::tree::{build_tree, BuildOptions, QuantizationTree};

fn small_tree(keep_transitions: bool) -> QuantizationTree {
    let model = DiffusionModel::black_scholes(0.1, 0.3).unwrap();
    let opts = BuildOptions {
        nr_iters: 5,
        keep_transitions,
        ..BuildOptions::default()
    };
    build_tree(&model, 100.0, 0.5, 3, &[1, 4, 5, 6], &opts).unwrap()
}

fn assert_trees_equal(a: &QuantizationTree, b: &QuantizationTree) {
    assert_eq!(a.model_kind, b.model_kind);
    assert_eq!(a.x0.to_bits(), b.x0.to_bits());
    assert_eq!(a.t_end.to_bits(), b.t_end.to_bits());
    assert_eq!(a.n_steps, b.n_steps);
    assert_eq!(a.levels.len(), b.levels.len());
    for (la, lb) in a.levels.iter().zip(&b.levels) {
        assert_eq!(la.t.to_bits(), lb.t.to_bits());
        assert_eq!(la.grid.len(), lb.grid.len());
        for (x, y) in la.grid.iter().zip(&lb.grid) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (w, v) in la.weights.iter().zip(&lb.weights) {
            assert_eq!(w.to_bits(), v.to_bits());
        }
        match (&la.transition_from_prev, &lb.transition_from_prev) {
            (None, None) => {}
            (Some(ra), Some(rb)) => {
                assert_eq!(ra.len(), rb.len());
                for (rowa, rowb) in ra.iter().zip(rb) {
                    for (x, y) in rowa.iter().zip(rowb) {
                        assert_eq!(x.to_bits(), y.to_bits());
                    }
                }
            }
            _ => panic!("transition presence mismatch"),
        }
    }
}

/// Parses the serialized form back into a `serde_json::Value` for surgical
/// corruption in the rejection tests.
fn tree_value(keep_transitions: bool) -> serde_json::Value {
    let tree = small_tree(keep_transitions);
    serde_json::from_str(&serialize_tree(&tree).unwrap()).unwrap()
}

fn parse_err(value: &serde_json::Value) -> String {
    parse_tree(&value.to_string()).unwrap_err().to_string()
}

#[test]
fn serialize_parse_round_trip_is_exact() {
    let tree = small_tree(true);
    let text = serialize_tree(&tree).unwrap();
    let back = parse_tree(&text).unwrap();
    assert_trees_equal(&tree, &back);
    // A second serialization of the reparsed tree is byte-identical.
    assert_eq!(text, serialize_tree(&back).unwrap());
}

#[test]
fn dropped_transitions_round_trip_as_null() {
    let tree = small_tree(false);
    let text = serialize_tree(&tree).unwrap();
    assert!(text.contains("\"transition\": null"));
    let back = parse_tree(&text).unwrap();
    assert_trees_equal(&tree, &back);
}

#[test]
fn document_layout_matches_schema() {
    let value = tree_value(true);
    let obj = value.as_object().unwrap();
    for key in ["model", "x0", "T", "n", "levels"] {
        assert!(obj.contains_key(key), "missing top-level key {key}");
    }
    assert_eq!(obj["model"]["name"], "black-scholes");
    assert_eq!(obj["n"], 3);
    let levels = obj["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 4);
    let root = levels[0].as_object().unwrap();
    assert_eq!(root["grid"].as_array().unwrap().len(), 1);
    assert!(root["transition"].is_null());
    let last = levels[3].as_object().unwrap();
    assert_eq!(last["transition"].as_array().unwrap().len(), 5);
}

#[test]
fn parse_resets_solver_diagnostics() {
    let tree = small_tree(true);
    let back = parse_tree(&serialize_tree(&tree).unwrap()).unwrap();
    for level in &back.levels {
        assert_eq!(level.newton_iterations, 0);
        assert_eq!(level.newton_residual, 0.0);
        assert_eq!(level.distortion, 0.0);
    }
}

#[test]
fn corrupted_weight_sum_names_the_level() {
    let mut value = tree_value(true);
    // Scale level 3's weights so they sum to 0.9.
    for w in value["levels"][3]["weights"].as_array_mut().unwrap() {
        let scaled = w.as_f64().unwrap() * 0.9;
        *w = serde_json::json!(scaled);
    }
    let err = parse_err(&value);
    assert!(
        err.contains("levels[3].weights") && err.contains("sum"),
        "error does not name the corrupted level: {err}"
    );
}

#[test]
fn negative_weight_names_the_entry() {
    let mut value = tree_value(true);
    value["levels"][2]["weights"][1] = serde_json::json!(-0.25);
    let err = parse_err(&value);
    assert!(
        err.contains("levels[2].weights[1]"),
        "error does not name the entry: {err}"
    );
}

#[test]
fn non_monotone_grid_is_rejected() {
    let mut value = tree_value(true);
    let grid = value["levels"][1]["grid"].as_array_mut().unwrap();
    grid.swap(0, 1);
    let err = parse_err(&value);
    assert!(
        err.contains("levels[1].grid") && err.contains("strictly increasing"),
        "error does not name the grid: {err}"
    );
}

#[test]
fn non_stochastic_transition_row_is_rejected() {
    let mut value = tree_value(true);
    for p in value["levels"][2]["transition"][1].as_array_mut().unwrap() {
        let scaled = p.as_f64().unwrap() * 1.1;
        *p = serde_json::json!(scaled);
    }
    let err = parse_err(&value);
    assert!(
        err.contains("levels[2].transition[1]") && err.contains("sums"),
        "error does not name the row: {err}"
    );
}

#[test]
fn transition_row_length_mismatch_is_rejected() {
    let mut value = tree_value(true);
    value["levels"][2]["transition"][0]
        .as_array_mut()
        .unwrap()
        .pop();
    let err = parse_err(&value);
    assert!(
        err.contains("levels[2].transition[0]"),
        "error does not name the row: {err}"
    );
}

#[test]
fn transition_row_count_must_match_previous_grid() {
    let mut value = tree_value(true);
    let rows = value["levels"][2]["transition"].as_array_mut().unwrap();
    let extra = rows[0].clone();
    rows.push(extra);
    let err = parse_err(&value);
    assert!(
        err.contains("levels[2].transition"),
        "error does not name the matrix: {err}"
    );
}

#[test]
fn weights_grid_length_mismatch_is_rejected() {
    let mut value = tree_value(true);
    value["levels"][1]["weights"].as_array_mut().unwrap().pop();
    let err = parse_err(&value);
    assert!(
        err.contains("levels[1].weights"),
        "error does not name the weights: {err}"
    );
}

#[test]
fn missing_field_is_reported_with_its_path() {
    let mut value = tree_value(true);
    value["levels"][1].as_object_mut().unwrap().remove("weights");
    let err = parse_err(&value);
    assert!(
        err.contains("levels[1]") && err.contains("weights"),
        "error does not locate the missing field: {err}"
    );
}

#[test]
fn unknown_field_is_rejected() {
    let mut value = tree_value(true);
    value["levels"][1]
        .as_object_mut()
        .unwrap()
        .insert("extra".into(), serde_json::json!(1));
    let err = parse_err(&value);
    assert!(
        err.contains("extra"),
        "error does not name the unknown field: {err}"
    );
}

#[test]
fn root_level_must_be_a_single_point_at_x0() {
    let mut value = tree_value(true);
    value["levels"][0]["grid"] = serde_json::json!([99.0, 100.0]);
    value["levels"][0]["weights"] = serde_json::json!([0.5, 0.5]);
    let err = parse_err(&value);
    assert!(err.contains("levels[0]"), "error does not name the root: {err}");

    let mut value = tree_value(true);
    value["levels"][0]["grid"] = serde_json::json!([99.5]);
    let err = parse_err(&value);
    assert!(
        err.contains("levels[0].grid") && err.contains("x0"),
        "error does not mention x0: {err}"
    );
}

#[test]
fn root_level_transition_must_be_null() {
    let mut value = tree_value(true);
    value["levels"][0]["transition"] = serde_json::json!([[1.0]]);
    let err = parse_err(&value);
    assert!(
        err.contains("levels[0].transition"),
        "error does not name the root transition: {err}"
    );
}

#[test]
fn off_mesh_time_stamp_is_rejected() {
    let mut value = tree_value(true);
    let t = value["levels"][2]["t"].as_f64().unwrap();
    value["levels"][2]["t"] = serde_json::json!(t + 1e-3);
    let err = parse_err(&value);
    assert!(
        err.contains("levels[2].t"),
        "error does not name the time stamp: {err}"
    );
}

#[test]
fn level_count_must_be_n_plus_one() {
    let mut value = tree_value(true);
    value["levels"].as_array_mut().unwrap().pop();
    let err = parse_err(&value);
    assert!(
        err.contains("levels"),
        "error does not mention the level count: {err}"
    );
}

#[test]
fn invalid_json_reports_a_parse_error() {
    let err = parse_tree("{\"model\": ").unwrap_err().to_string();
    assert!(!err.is_empty());
}

#[test]
fn model_spec_round_trips_for_every_serializable_model() {
    let cases = [
        DiffusionModel::brownian(),
        DiffusionModel::black_scholes(0.15, 0.4).unwrap(),
        DiffusionModel::pseudo_cev(0.15, 4.0, 0.5).unwrap(),
    ];
    for model in cases {
        let spec = ModelSpec::from_kind(model.kind()).unwrap();
        assert_eq!(spec.kind(), model.kind());
        let rebuilt = spec.to_model().unwrap();
        assert_eq!(rebuilt.kind(), model.kind());
    }
}

#[test]
fn custom_models_have_no_serialized_form() {
    let err = ModelSpec::from_kind(ModelKind::Custom).unwrap_err().to_string();
    assert!(err.contains("custom"), "unexpected message: {err}");
}

#[test]
fn invalid_model_parameters_are_rejected_on_conversion() {
    let spec: ModelSpec =
        serde_json::from_str(r#"{"name":"black-scholes","r":0.1,"sigma":-0.4}"#).unwrap();
    assert!(spec.to_model().is_err());
}

#[test]
fn doc_to_tree_accepts_a_hand_written_document() {
    let text = r#"{
      "model": {"name": "brownian"},
      "x0": 0.0,
      "T": 1.0,
      "n": 1,
      "levels": [
        {"t": 0.0, "grid": [0.0], "weights": [1.0], "transition": null},
        {"t": 1.0, "grid": [-1.0, 1.0], "weights": [0.5, 0.5],
         "transition": [[0.5, 0.5]]}
      ]
    }"#;
    let doc: TreeDoc = serde_json::from_str(text).unwrap();
    let tree = doc_to_tree(doc).unwrap();
    assert_eq!(tree.n_steps, 1);
    assert_eq!(tree.terminal().grid.len(), 2);
    // And it survives a full round trip through the writer.
    let round = parse_tree(&serialize_tree(&tree).unwrap()).unwrap();
    assert_trees_equal(&tree, &round);
}

#[test]
fn tree_to_doc_preserves_every_field() {
    let tree = small_tree(true);
    let doc = tree_to_doc(&tree).unwrap();
    assert_eq!(doc.n, 3);
    assert_eq!(doc.x0, 100.0);
    assert_eq!(doc.t_end, 0.5);
    assert_eq!(doc.levels.len(), 4);
    assert_eq!(doc.levels[3].grid.len(), 6);
    assert!(doc.levels[0].transition.is_none());
    assert!(doc.levels[1].transition.is_some());
}
