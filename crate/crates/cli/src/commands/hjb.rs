use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use ossp::hjb::solve::max_delta_grid;
use ossp::hjb::{discretize, hjb_solve, Grid, GridModel, HjbMethod, SpeedProfile, Stencil, TargetSpec};
use ossp::io::fmt_f64;

use super::note;
use crate::args::{HjbArgs, Method, StencilArg};
use crate::error::CliError;
use crate::manifest::Run;
use crate::syntax::{DeltaArg, ProfileSpec, TargetArg};

const PROFILE_SAMPLES: usize = 360;

/// Reads `angle,speed` rows; a non-numeric first line is a header.
fn sampled_profile(run: &mut Run, path: &Path) -> Result<SpeedProfile, CliError> {
    let text = run.read(path)?;
    let (mut angles, mut speeds) = (Vec::new(), Vec::new());
    for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let parsed = line
            .split_once(',')
            .and_then(|(a, s)| Some((a.trim().parse::<f64>().ok()?, s.trim().parse::<f64>().ok()?)));
        match parsed {
            Some((a, s)) if s > 0.0 && s.is_finite() => {
                angles.push(a);
                speeds.push(s);
            }
            None if k == 0 => {}
            _ => return Err(CliError::invalid(format!("{}:{}: expected angle,speed", path.display(), k + 1))),
        }
    }
    if angles.len() < 3 || angles.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::invalid("sampled profile needs at least 3 rows with increasing angles"));
    }
    Ok(SpeedProfile::sampled(&angles, &speeds))
}

fn profile(run: &mut Run, spec: &ProfileSpec) -> Result<SpeedProfile, CliError> {
    Ok(match spec {
        ProfileSpec::Iso(speed) => SpeedProfile::Isotropic { speed: *speed },
        ProfileSpec::Ellipse { a, b, theta } => SpeedProfile::Elliptic { a: *a, b: *b, theta: *theta },
        ProfileSpec::Ellipsoid { axes, angle } => SpeedProfile::ellipsoid_about_z(*axes, *angle),
        ProfileSpec::Sampled(path) => sampled_profile(run, path)?,
    })
}

fn build(args: &HjbArgs, run: &mut Run) -> Result<GridModel, CliError> {
    if !(args.h > 0.0 && args.h.is_finite()) {
        return Err(CliError::invalid("--h must be positive"));
    }
    let ny = args.ny.unwrap_or(args.nx);
    let three_d = args.nz.is_some();
    if args.nx < 2 || ny < 2 || args.nz.is_some_and(|nz| nz < 2) {
        return Err(CliError::invalid("every grid dimension needs at least 2 points"));
    }
    let grid = match args.nz {
        Some(nz) => Grid::new_3d(args.nx, ny, nz, args.h),
        None => Grid::new_2d(args.nx, ny, args.h),
    };
    let stencil = match (args.stencil, three_d) {
        (None, false) | (Some(StencilArg::EightPoint), false) => Stencil::EightPoint,
        (Some(StencilArg::FourPoint), false) => Stencil::FourPoint,
        (None, true) | (Some(StencilArg::SixPoint3d), true) => Stencil::SixPoint3d,
        (Some(_), true) => return Err(CliError::invalid("a 3D grid needs --stencil 6pt3d")),
        (Some(StencilArg::SixPoint3d), false) => return Err(CliError::invalid("--stencil 6pt3d needs --nz")),
    };
    let target = match &args.target {
        TargetArg::Boundary(q) => TargetSpec::Boundary { exit_cost: *q },
        TargetArg::Point(x) => {
            if x.len() != if three_d { 3 } else { 2 } {
                return Err(CliError::invalid("target dimension does not match the grid"));
            }
            TargetSpec::Point([x[0], x[1], x.get(2).copied().unwrap_or(0.0)])
        }
    };
    let profile = Arc::new(profile(run, &args.profile)?);
    Ok(discretize(&grid, stencil, |_| profile.clone(), &target))
}

fn grid_prefix(gm: &GridModel, id: usize, three_d: bool) -> String {
    let c = gm.grid.coords(id);
    let x = gm.grid.position(id);
    if three_d {
        format!("{},{},{},{},{},{}", c[0], c[1], c[2], fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(x[2]))
    } else {
        format!("{},{},{},{}", c[0], c[1], fmt_f64(x[0]), fmt_f64(x[1]))
    }
}

fn header(three_d: bool, tail: &str) -> String {
    if three_d { format!("i,j,k,x,y,z,{tail}\n") } else { format!("i,j,x,y,{tail}\n") }
}

fn profile_samples(p: &SpeedProfile) -> String {
    let mut out = String::from("angle,speed,vx,vy\n");
    for k in 0..PROFILE_SAMPLES {
        let t = TAU * k as f64 / PROFILE_SAMPLES as f64;
        let dir = [t.cos(), t.sin(), 0.0];
        let v = p.velocity(dir);
        writeln!(out, "{},{},{},{}", fmt_f64(t), fmt_f64(p.speed(dir)), fmt_f64(v[0]), fmt_f64(v[1])).unwrap();
    }
    out
}

pub fn run(args: &HjbArgs, run: &mut Run) -> Result<(), CliError> {
    let gm = build(args, run)?;
    let three_d = args.nz.is_some();
    let method = match (args.method, args.delta) {
        (Method::Dijkstra, None) => HjbMethod::Dijkstra,
        (Method::Vi, None) => HjbMethod::Vi,
        (Method::Dial, Some(DeltaArg::Value(d))) => HjbMethod::Dial(d),
        (Method::Dial, Some(DeltaArg::Auto)) => {
            let d = max_delta_grid(&gm).map_err(|e| CliError::refused(format!("cannot compute the bucket width: {e}")))?;
            if !(d > 0.0) {
                return Err(CliError::refused("largest admissible bucket width is 0; use dijkstra"));
            }
            note(format!("delta = {d}"));
            HjbMethod::Dial(d)
        }
        (Method::Dial, None) => return Err(CliError::invalid("--method dial needs --delta")),
        (Method::Gs, _) => return Err(CliError::invalid("hjb supports dijkstra, dial and vi")),
        (_, Some(_)) => return Err(CliError::invalid("--delta only applies to --method dial")),
    };
    if let HjbMethod::Dial(d) = method {
        run.resolve("delta", d);
    }
    let sol = hjb_solve(&gm, method, args.force)?;
    let mut u = header(three_d, "value");
    for (id, v) in sol.values.iter().enumerate() {
        writeln!(u, "{},{}", grid_prefix(&gm, id, three_d), fmt_f64(*v)).unwrap();
    }
    run.write(&args.out, &u)?;
    if let Some(path) = &args.dirs {
        let mut out = header(three_d, if three_d { "dx,dy,dz" } else { "dx,dy" });
        for (id, d) in sol.directions.iter().enumerate() {
            let dims = if three_d { 3 } else { 2 };
            let cells: Vec<String> = match d {
                Some(d) => d[..dims].iter().map(|c| fmt_f64(*c)).collect(),
                None => vec![String::new(); dims],
            };
            writeln!(out, "{},{}", grid_prefix(&gm, id, three_d), cells.join(",")).unwrap();
        }
        run.write(path, &out)?;
    }
    if let Some(path) = &args.plotdata {
        let p = profile(run, &args.profile)?;
        run.write(path, &profile_samples(&p))?;
    }
    Ok(())
}
