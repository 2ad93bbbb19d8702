use ossp::io::{model_from_json_unchecked, model_to_json};
use ossp::pruning::prune;
use ossp::validate::{validate_model, ViolationKind};

use super::note;
use crate::args::PruneArgs;
use crate::error::CliError;
use crate::manifest::Run;

pub fn run(args: &PruneArgs, run: &mut Run) -> Result<(), CliError> {
    let text = run.read(&args.model)?;
    let model = model_from_json_unchecked(&text)?;
    // Self-transitions are what pruning removes first; anything else is fatal.
    let report = validate_model(&model);
    let fatal: Vec<_> = report.hard().filter(|v| v.kind != ViolationKind::SelfTransition).cloned().collect();
    if !fatal.is_empty() {
        return Err(CliError::invalid(format!("invalid model: {}", fatal[0].detail)).with_detail(fatal));
    }
    let (pruned, report) = prune(&model).map_err(|e| CliError::invalid(e.to_string()))?;
    note(format!("{} of {} actions removed", report.removed.len(), report.actions_before));
    run.write(&args.out, &model_to_json(&pruned))?;
    if let Some(path) = &args.report {
        run.write_json(path, &report)?;
    }
    Ok(())
}
