mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use common::fixture_path;

fn bethe_flow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bethe-flow"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn diamond_run_matches_oracle() {
    let model = fixture_path("diamond.json");
    let out = bethe_flow(&["run", path_str(&model), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["converged"], true);
    assert_eq!(r["tree_like"], true);
    assert!(r["oracle"]["max_belief_error"].as_f64().unwrap() <= 1e-7);
    assert!(r["oracle"]["bethe_gap"].as_f64().unwrap().abs() <= 1e-6);
}

#[test]
fn triangle_run_is_critical() {
    let model = fixture_path("triangle.json");
    let out = bethe_flow(&["run", path_str(&model), "--tau", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["converged"], true);
    assert_eq!(r["tree_like"], false);
    assert!(r["residuals"]["criticality"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn every_schedule_and_form_converges() {
    let model = fixture_path("triangle.json");
    for schedule in ["synchronous", "sequential"] {
        for form in ["potential", "message"] {
            let out = bethe_flow(&[
                "run",
                path_str(&model),
                "--schedule",
                schedule,
                "--form",
                form,
                "--compact",
            ]);
            assert_eq!(out.status.code(), Some(0), "{schedule} {form}");
        }
    }
}

#[test]
fn step_limit_exits_with_two() {
    let model = fixture_path("triangle.json");
    let out = bethe_flow(&["run", path_str(&model), "--steps", "3", "--no-normalize"]);
    assert_eq!(out.status.code(), Some(2));
    let r = json(&out);
    assert_eq!(r["converged"], false);
    assert_eq!(r["status"], "max_steps");
    assert_eq!(r["config"]["normalize"], false);
    assert_eq!(r["steps"], 3);
}

#[test]
fn trace_has_fixed_header_and_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let model = fixture_path("triangle.json");
    let out = bethe_flow(&["run", path_str(&model), "--trace", path_str(&trace)]);
    let steps = json(&out)["steps"].as_u64().unwrap() as usize;
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("step,residual,consistency,conserved_drift")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), steps);
    assert!(rows[0].starts_with("1,"));
    assert_eq!(rows[0].split(',').count(), 4);
}

#[test]
fn run_report_round_trips_through_energy() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["diamond.json", "triangle.json", "ternary.json"] {
        let model = fixture_path(name);
        let out = bethe_flow(&["run", path_str(&model)]);
        let report = dir.path().join(format!("{name}.report"));
        std::fs::write(&report, &out.stdout).unwrap();
        let e = bethe_flow(&["energy", path_str(&model), path_str(&report)]);
        assert_eq!(e.status.code(), Some(0));
        let e = json(&e);
        assert_eq!(e["source"], "beliefs");
        let a = json(&out)["bethe_free_energy"].as_f64().unwrap();
        let b = e["bethe_free_energy"].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-10, "{name}: {a} vs {b}");
    }
}

#[test]
fn energy_falls_back_to_oracle() {
    let model = fixture_path("diamond.json");
    let out = bethe_flow(&["energy", path_str(&model)]);
    assert_eq!(out.status.code(), Some(0));
    let e = json(&out);
    assert_eq!(e["source"], "oracle");
    let fb = e["bethe_free_energy"].as_f64().unwrap();
    let lz = e["log_partition"].as_f64().unwrap();
    assert!((fb + lz).abs() <= 1e-8);
    assert_eq!(e["regions"].as_array().unwrap().len(), 4);
}

fn write_model(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("model.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn energy_without_beliefs_on_a_large_model_fails() {
    let dir = tempfile::tempdir().unwrap();
    let vars: Vec<String> = (1..=26)
        .map(|i| format!("{{\"id\": {i}, \"cardinality\": 2}}"))
        .collect();
    let text = format!(
        "{{\"format\": \"bethe-flow/1\", \"variables\": [{}], \"regions\": [[{}], [{}]]}}",
        vars.join(", "),
        (1..=13)
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(", "),
        (14..=26)
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(", "),
    );
    let model = write_model(dir.path(), &text);
    let out = bethe_flow(&["energy", path_str(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("enumeration limit"));
}

#[test]
fn malformed_table_names_the_potential() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        r#"{"format": "bethe-flow/1",
            "variables": [{"id": 1, "cardinality": 2}, {"id": 2, "cardinality": 3}],
            "regions": [[1, 2]],
            "potentials": [
                {"region": [1, 2], "table": [0, 0, 0, 0, 0, 0]},
                {"region": [2], "table": [1, 2]}
            ]}"#,
    );
    let out = bethe_flow(&["run", path_str(&model)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("potentials[1]"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        "{\"format\": \"bethe-flow/1\",\n \"variables\": [}",
    );
    let out = bethe_flow(&["check", path_str(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_variable_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        r#"{"format": "bethe-flow/1", "variables": [{"id": 1, "cardinality": 2}], "regions": [[1, 9]]}"#,
    );
    assert_eq!(
        bethe_flow(&["run", path_str(&model)]).status.code(),
        Some(1)
    );
}

#[test]
fn check_seed_changes_fields_but_not_outcomes() {
    let model = fixture_path("ternary.json");
    let a = json(&bethe_flow(&["check", path_str(&model), "--seed", "1"]));
    let b = json(&bethe_flow(&["check", path_str(&model), "--seed", "2"]));
    assert_eq!(a["all_passed"], true);
    assert_ne!(a["invariants"], b["invariants"]);
    let status = |v: &Value| {
        v["invariants"]
            .as_array()
            .unwrap()
            .iter()
            .map(|i| i["status"].clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(status(&a), status(&b));
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let model = fixture_path("diamond.json");
    let out = bethe_flow(&["run", path_str(&model), "--compact"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let start = text.find("\"bethe_free_energy\":").unwrap() + "\"bethe_free_energy\":".len();
    let number: String = text[start..]
        .chars()
        .take_while(|c| !matches!(c, ',' | '}'))
        .collect();
    let mantissa = number.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17, "{number}");
}
