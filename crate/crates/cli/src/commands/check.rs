use std::fmt::Write as _;

use ossp::causality::{check_mc_improved_with, check_mc_simplified_with, CausalityReport, CheckOptions};
use ossp::io::fmt_f64;
use ossp::{Action, OsspModel, Support};

use super::{load_model, note};
use crate::args::{CheckArgs, CriterionArg};
use crate::error::CliError;
use crate::manifest::Run;
use crate::syntax::DeltaArg;

const CURVE_POINTS: usize = 101;

fn check(model: &OsspModel, args: &CheckArgs, delta: f64) -> Result<CausalityReport, CliError> {
    let opts = CheckOptions { samples: args.samples, ..Default::default() };
    match args.criterion {
        CriterionArg::Improved => Ok(check_mc_improved_with(model, delta, &opts)),
        CriterionArg::Simplified => {
            check_mc_simplified_with(model, delta, &opts).map_err(|e| CliError::invalid(e.to_string()))
        }
    }
}

/// `K(p)` of every urgency mode next to the line `p K(1) + (1 - p) δ` that it
/// must stay above.
fn mode_curves(model: &OsspModel, delta: f64) -> String {
    let mut out = String::from("node,action,p,k,restriction\n");
    for (i, set) in model.actions.iter().enumerate() {
        for (a, action) in set.iter().enumerate() {
            let Action::Urgency(mode) = action else { continue };
            let ps: Vec<f64> = match &mode.support {
                Support::Points(ps) => ps.clone(),
                Support::Interval => (0..CURVE_POINTS).map(|k| k as f64 / (CURVE_POINTS - 1) as f64).collect(),
            };
            let k1 = mode.curve.eval(1.0);
            for p in ps {
                let line = p * k1 + (1.0 - p) * delta;
                writeln!(out, "{i},{a},{},{},{}", fmt_f64(p), fmt_f64(mode.curve.eval(p)), fmt_f64(line)).unwrap();
            }
        }
    }
    out
}

pub fn run(args: &CheckArgs, run: &mut Run) -> Result<(), CliError> {
    if args.samples < 2 {
        return Err(CliError::invalid("--samples must be at least 2"));
    }
    let model = load_model(run, &args.model)?;
    let mut report = check(&model, args, 0.0)?;
    let delta = match args.delta {
        DeltaArg::Value(0.0) => 0.0,
        DeltaArg::Value(d) => {
            report = check(&model, args, d)?;
            d
        }
        DeltaArg::Auto if report.certified && report.global_delta > 0.0 => {
            let d = report.global_delta;
            note(format!("delta = {d}"));
            report = check(&model, args, d)?;
            d
        }
        DeltaArg::Auto => 0.0,
    };
    run.resolve("delta", delta);
    run.write_json(&args.out, &report)?;
    if let Some(path) = &args.plotdata {
        run.write(path, &mode_curves(&model, delta))?;
    }
    if args.delta == DeltaArg::Auto && !(delta > 0.0) {
        return Err(CliError::refused("largest certified bucket width is 0"));
    }
    if report.certified {
        note(format!("certified at delta = {delta} (largest width {})", report.global_delta));
        return Ok(());
    }
    let violations = report.violations();
    for v in &violations {
        let c = v.violation.as_ref().expect("violations carry details");
        let r = c.r.map_or("-".to_string(), |r| r.to_string());
        note(format!("violation: node {} action {} r {r} gap {}", v.node, v.action, c.gap));
    }
    Err(CliError::refused(format!("{} violating action(s) at delta = {delta}", violations.len())))
}
