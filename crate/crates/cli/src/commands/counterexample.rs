use std::path::PathBuf;

use ossp::causality::build_sharpness_counterexample;
use ossp::io::model_to_json;
use serde::Serialize;

use super::note;
use crate::args::CounterexampleArgs;
use crate::error::CliError;
use crate::manifest::Run;

/// What a solver run on the generated model should show.
#[derive(Serialize)]
struct Note {
    node: usize,
    action: usize,
    successors: Vec<usize>,
    r: usize,
    delta: f64,
    /// Label-setting solver expected to disagree, with its arguments.
    solver: String,
    b: f64,
    b_lower: f64,
    b_upper: f64,
    successor_values: Vec<f64>,
    /// Value of `node` under value iteration.
    value: f64,
    /// Value of `node` from the label-setting solver.
    label_setting_value: f64,
    expected_disagreement: f64,
}

fn note_path(args: &CounterexampleArgs) -> PathBuf {
    args.note.clone().unwrap_or_else(|| args.out.with_extension("note.json"))
}

pub fn run(args: &CounterexampleArgs, run: &mut Run) -> Result<(), CliError> {
    let xi = match (&args.xi, args.m) {
        (Some(xi), Some(m)) if xi.len() != m => {
            return Err(CliError::invalid(format!("--xi has {} entries but --m is {m}", xi.len())))
        }
        (Some(xi), _) => xi.clone(),
        (None, m) => {
            let m = m.unwrap_or(2);
            if m < 2 {
                return Err(CliError::invalid("--m must be at least 2"));
            }
            vec![1.0 / m as f64; m]
        }
    };
    run.resolve("xi", &xi);
    let cex = build_sharpness_counterexample(&xi, args.r, args.c_a, args.c_tilde, args.delta)
        .map_err(|e| CliError::invalid(e.to_string()))?;
    let solver = if args.delta > 0.0 { format!("dial --delta {}", args.delta) } else { "dijkstra".into() };
    note(format!(
        "node {}: value iteration gives {}, {solver} gives {}",
        cex.node, cex.value, cex.label_setting_value
    ));
    let note = Note {
        node: cex.node,
        action: cex.action,
        successors: cex.successors.clone(),
        r: cex.r,
        delta: args.delta,
        solver,
        b: cex.b,
        b_lower: cex.b_lower,
        b_upper: cex.b_upper,
        successor_values: cex.successor_values.clone(),
        value: cex.value,
        label_setting_value: cex.label_setting_value,
        expected_disagreement: (cex.label_setting_value - cex.value).abs(),
    };
    run.write(&args.out, &model_to_json(&cex.model))?;
    run.write_json(&note_path(args), &note)?;
    Ok(())
}
