//! Command-line surface. Every argument struct serializes into the run manifest.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::syntax::{DeltaArg, LsmSpec, ProfileSpec, TargetArg};

#[derive(Parser, Debug)]
#[command(name = "ossp", version, about = "Opportunistically stochastic shortest path toolkit")]
pub struct Cli {
    /// Print failures as one-line JSON on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Where to write the run manifest (default: next to the first output).
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a model with an iterative or label-setting method.
    Solve(SolveArgs),
    /// Certify monotone causality of a model.
    Check(CheckArgs),
    /// Remove duplicate, dominated and replaceable actions.
    Prune(PruneArgs),
    /// Discretize and solve an anisotropic eikonal problem on a grid.
    Hjb(HjbArgs),
    /// Build and solve lane-level road networks.
    #[command(subcommand)]
    Route(RouteCommand),
    /// Generate a model on which label setting disagrees with value iteration.
    Counterexample(CounterexampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Vi,
    Gs,
    Dijkstra,
    Dial,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "dijkstra")]
    pub method: Method,
    /// Bucket width for dial: a number or `auto`.
    #[arg(long)]
    pub delta: Option<DeltaArg>,
    #[arg(long, default_value = "values.csv")]
    pub values: PathBuf,
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Acceptance order of a label-setting run (order,node,value).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = ossp::solve::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Run label setting without a causality certificate.
    #[arg(long)]
    pub force: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionArg {
    Improved,
    Simplified,
}

#[derive(Args, Debug, Serialize)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// A number or `auto` (the largest certified width).
    #[arg(long, default_value = "0")]
    pub delta: DeltaArg,
    #[arg(long, value_enum, default_value = "improved")]
    pub criterion: CriterionArg,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    /// Sample points per continuous mode.
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// Mode cost curves against the restriction line (node,action,p,k,restriction).
    #[arg(long)]
    pub plotdata: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PruneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "pruned.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum StencilArg {
    #[value(name = "4pt")]
    #[serde(rename = "4pt")]
    FourPoint,
    #[value(name = "8pt")]
    #[serde(rename = "8pt")]
    EightPoint,
    #[value(name = "6pt3d")]
    #[serde(rename = "6pt3d")]
    SixPoint3d,
}

#[derive(Args, Debug, Serialize)]
pub struct HjbArgs {
    #[arg(long)]
    pub nx: usize,
    /// Defaults to `nx`.
    #[arg(long)]
    pub ny: Option<usize>,
    /// Makes the grid three-dimensional.
    #[arg(long)]
    pub nz: Option<usize>,
    #[arg(long)]
    pub h: f64,
    /// `iso:F`, `ellipse:a,b,theta`, `ellipsoid:a,b,c,R` or `sampled:file.csv`.
    #[arg(long)]
    pub profile: ProfileSpec,
    /// Defaults to 8pt in 2D and 6pt3d in 3D.
    #[arg(long, value_enum)]
    pub stencil: Option<StencilArg>,
    /// `x,y[,z]` or `boundary[:q]`.
    #[arg(long)]
    pub target: TargetArg,
    #[arg(long, value_enum, default_value = "dijkstra")]
    pub method: Method,
    #[arg(long)]
    pub delta: Option<DeltaArg>,
    #[arg(long, default_value = "u.csv")]
    pub out: PathBuf,
    #[arg(long)]
    pub dirs: Option<PathBuf>,
    /// Speed profile sampled around the unit circle in the xy-plane.
    #[arg(long)]
    pub plotdata: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Subcommand, Debug)]
pub enum RouteCommand {
    /// Multi-lane highway with an onramp.
    Highway(HighwayArgs),
    /// Two-ring roundabout.
    Roundabout(RoundaboutArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndArg {
    VirtualForced,
    VirtualColumn,
}

/// Outputs shared by both road networks.
#[derive(Args, Debug, Serialize)]
pub struct RouteOutputs {
    #[arg(long, default_value = "policy.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub values: Option<PathBuf>,
    /// Node geometry, p* and policy arrows as CSV.
    #[arg(long)]
    pub plotdata: Option<PathBuf>,
    /// Policy digraph in Graphviz format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct HighwayArgs {
    /// JSON highway configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub lanes: Option<usize>,
    /// Cell length in meters.
    #[arg(long = "D")]
    pub d: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub g1: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Distance of the onramp merge point from the exit.
    #[arg(long, conflicts_with = "no_onramp")]
    pub onramp: Option<f64>,
    #[arg(long)]
    pub no_onramp: bool,
    #[arg(long)]
    pub target_lane: Option<usize>,
    /// `escalating:p,Y,...`, `jones:g2`, `quadratic:b[,g]` or `rbc:p,Y,...`.
    #[arg(long)]
    pub lsm: Option<LsmSpec>,
    /// Width used for the rbc control point.
    #[arg(long, default_value_t = 0.0)]
    pub rbc_delta: f64,
    #[arg(long, value_enum)]
    pub end: Option<EndArg>,
    /// Per-node comparison against the deterministic plan (node,stp,sp,reduction).
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[command(flatten)]
    pub outputs: RouteOutputs,
}

#[derive(Args, Debug, Serialize)]
pub struct RoundaboutArgs {
    /// JSON roundabout configuration; omitted fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub outputs: RouteOutputs,
}

#[derive(Args, Debug, Serialize)]
pub struct CounterexampleArgs {
    /// Number of successors; ξ defaults to the uniform distribution.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated distribution of the stochastic action.
    #[arg(long, value_delimiter = ',')]
    pub xi: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c_a: f64,
    #[arg(long, default_value_t = 3.0)]
    pub c_tilde: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value = "cex.json")]
    pub out: PathBuf,
    /// Expected-disagreement note (default: `<out>.note.json`).
    #[arg(long)]
    pub note: Option<PathBuf>,
}
