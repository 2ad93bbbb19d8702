pub mod check;
pub mod counterexample;
pub mod hjb;
pub mod prune;
pub mod route;
pub mod solve;

use std::path::Path;

use ossp::causality::{check_mc_improved, CausalityReport};
use ossp::io::{fmt_f64, model_from_json};
use ossp::labelset::SolveTrace;
use ossp::OsspModel;

use crate::error::CliError;
use crate::manifest::Run;

pub fn load_model(run: &mut Run, path: &Path) -> Result<OsspModel, CliError> {
    let text = run.read(path)?;
    Ok(model_from_json(&text)?)
}

/// Refuses label setting at width `delta` unless the improved criterion
/// certifies the model or `force` is set.
pub fn certify(model: &OsspModel, delta: f64, force: bool) -> Result<(), CliError> {
    if force {
        return Ok(());
    }
    let report = check_mc_improved(model, delta);
    if report.certified {
        Ok(())
    } else {
        Err(refusal(&report))
    }
}

pub fn refusal(report: &CausalityReport) -> CliError {
    let violations: Vec<_> = report.violations().into_iter().cloned().collect();
    let first = &violations[0];
    CliError::refused(format!(
        "model is not monotone causal at δ = {}: {} violating action(s), first at node {} action {} (use --force to solve anyway)",
        report.delta,
        violations.len(),
        first.node,
        first.action
    ))
    .with_detail(violations)
}

/// `order,node,value` rows of a label-setting run.
pub fn trace_csv(trace: &SolveTrace) -> String {
    let mut out = String::from("order,node,value\n");
    for (k, (node, v)) in trace.acceptance.iter().zip(&trace.accepted_values).enumerate() {
        out.push_str(&format!("{k},{node},{}\n", fmt_f64(*v)));
    }
    out
}

pub fn note(message: impl AsRef<str>) {
    eprintln!("{}", message.as_ref());
}
