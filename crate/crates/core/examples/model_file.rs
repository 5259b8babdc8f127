//! Loads a model in the JSON format used by the command-line tool and
//! prints the run report the `run` subcommand would emit.

use bethe_flow::cli::{json, run_model, Model, RunFlags};

const MODEL: &str = r#"{
  "format": "bethe-flow/1",
  "variables": [{"id": 1, "cardinality": 2}, {"id": 2, "cardinality": 3}],
  "regions": [[1, 2]],
  "potentials": [
    {"region": [1, 2], "table": [0.0, 0.1, 0.2, 1.0, 1.1, 1.2]},
    {"region": [2], "table": [1.0, 2.0, 1.0], "space": "linear"}
  ]
}"#;

fn main() -> bethe_flow::Result<()> {
    let model = Model::from_json(MODEL)?;
    let flags = RunFlags {
        oracle: true,
        ..RunFlags::default()
    };
    let (report, trace) = run_model(&model, &flags)?;
    println!("{}", json::to_string_pretty(&report));
    eprintln!("{} trace rows", trace.records.len());
    Ok(())
}
