//! `ossp`: solve, certify, prune and generate OSSP models from the command line.
//!
//! Exit codes: 0 success, 1 output failure, 2 certification refused,
//! 3 validation error, 4 non-convergence.

mod args;
mod commands;
mod error;
mod manifest;
mod syntax;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, RouteCommand};
use error::{CliError, Kind};
use manifest::Run;

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let (run, result) = match &cli.command {
        Command::Solve(a) => with_run("solve", a, |r| commands::solve::run(a, r)),
        Command::Check(a) => with_run("check", a, |r| commands::check::run(a, r)),
        Command::Prune(a) => with_run("prune", a, |r| commands::prune::run(a, r)),
        Command::Hjb(a) => with_run("hjb", a, |r| commands::hjb::run(a, r)),
        Command::Route(RouteCommand::Highway(a)) => with_run("route-highway", a, |r| commands::route::highway(a, r)),
        Command::Route(RouteCommand::Roundabout(a)) => {
            with_run("route-roundabout", a, |r| commands::route::roundabout(a, r))
        }
        Command::Counterexample(a) => with_run("counterexample", a, |r| commands::counterexample::run(a, r)),
    };
    // A manifest accompanies every run that produced outputs, failed or not.
    if run.has_outputs() || cli.manifest.is_some() {
        let path = cli.manifest.clone().unwrap_or_else(|| run.default_manifest_path());
        let written = run.finish(&path);
        return result.and(written);
    }
    result
}

fn with_run<A: serde::Serialize>(
    name: &str,
    args: &A,
    body: impl FnOnce(&mut Run) -> Result<(), CliError>,
) -> (Run, Result<(), CliError>) {
    let mut run = Run::new(name, args);
    let result = body(&mut run);
    (run, result)
}

fn report(err: &CliError, json: bool) -> ExitCode {
    if json {
        eprintln!("{}", err.to_json());
    } else {
        eprintln!("error: {err}");
    }
    ExitCode::from(err.kind.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let json = std::env::args().any(|a| a == "--json-errors");
            if json {
                return report(&CliError::new(Kind::Validation, e.render().to_string().trim_end()), true);
            }
            let _ = e.print();
            return ExitCode::from(Kind::Validation.exit_code());
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e, cli.json_errors),
    }
}
