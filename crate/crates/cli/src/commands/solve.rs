use ossp::causality::check_mc_improved;
use ossp::io::values_csv;
use ossp::labelset::{dial_solve, dijkstra_solve};
use ossp::solve::{gauss_seidel_solve, is_explicitly_causal, value_iteration};

use super::{certify, load_model, note, trace_csv};
use crate::args::{Method, SolveArgs};
use crate::error::CliError;
use crate::manifest::Run;
use crate::syntax::DeltaArg;

pub fn run(args: &SolveArgs, run: &mut Run) -> Result<(), CliError> {
    let model = load_model(run, &args.model)?;
    if args.trace.is_some() && matches!(args.method, Method::Vi | Method::Gs) {
        return Err(CliError::invalid("--trace needs a label-setting method (dijkstra or dial)"));
    }
    if args.delta.is_some() && args.method != Method::Dial {
        return Err(CliError::invalid("--delta only applies to --method dial"));
    }
    let (values, policy, trace) = match args.method {
        Method::Vi => {
            let sol = value_iteration(&model, args.tol, args.max_iters)?;
            note(format!("value iteration converged after {} sweeps", sol.iterations));
            (sol.values, sol.policy, None)
        }
        Method::Gs => {
            let order = is_explicitly_causal(&model);
            if order.is_none() {
                note("model has cycles; sweeping in index order");
            }
            let order = order.unwrap_or_else(|| (0..model.n).collect());
            let sol = gauss_seidel_solve(&model, &order, args.tol, args.max_iters)?;
            note(format!("Gauss-Seidel converged after {} sweeps", sol.iterations));
            (sol.values, sol.policy, None)
        }
        Method::Dijkstra => {
            certify(&model, 0.0, args.force)?;
            let sol = dijkstra_solve(&model);
            (sol.values, sol.policy, Some(sol.trace))
        }
        Method::Dial => {
            let delta = match args.delta {
                None => return Err(CliError::invalid("--method dial needs --delta")),
                Some(DeltaArg::Value(d)) => {
                    certify(&model, d, args.force)?;
                    d
                }
                Some(DeltaArg::Auto) => {
                    let d = check_mc_improved(&model, 0.0).global_delta;
                    if !(d > 0.0) {
                        return Err(CliError::refused("largest certified bucket width is 0; use dijkstra"));
                    }
                    note(format!("delta = {d}"));
                    d
                }
            };
            run.resolve("delta", delta);
            let sol = dial_solve(&model, delta).map_err(|e| CliError::invalid(e.to_string()))?;
            (sol.values, sol.policy, Some(sol.trace))
        }
    };
    run.write(&args.values, &values_csv(&values))?;
    if let Some(path) = &args.policy {
        run.write_json(path, &policy)?;
    }
    if let (Some(path), Some(trace)) = (&args.trace, &trace) {
        run.write(path, &trace_csv(trace))?;
    }
    Ok(())
}
