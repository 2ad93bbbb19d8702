use std::collections::BTreeMap;
use std::fmt::Write as _;

use ossp::causality::check_mc_improved;
use ossp::io::{fmt_f64, values_csv};
use ossp::labelset::dijkstra_solve;
use ossp::routing::{
    build_highway, build_roundabout, compare_stp_sp, entry_preference, EndTopology, HighwayConfig, LaneNetwork,
    LaneNode, Ring, RoundaboutConfig, RoundaboutError,
};
use ossp::validate::validate_model;
use ossp::{Action, Choice, Policy, ValueFunction};
use serde::Serialize;

use super::{note, refusal};
use crate::args::{EndArg, HighwayArgs, RoundaboutArgs, RouteOutputs};
use crate::error::CliError;
use crate::manifest::Run;

#[derive(Serialize)]
struct PlanNode<'a> {
    node: usize,
    #[serde(flatten)]
    place: &'a LaneNode,
    /// `None` where the exit is unreachable.
    value: Option<f64>,
    choice: Option<Choice>,
}

#[derive(Serialize)]
struct Summary {
    median: f64,
    mean: f64,
    max: f64,
}

#[derive(Serialize)]
struct RoutePlan<'a> {
    format: u32,
    /// Largest certified bucket width, absent for forced runs.
    global_delta: Option<f64>,
    target: usize,
    nodes: Vec<PlanNode<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entry_preferences: Option<BTreeMap<String, Option<Ring>>>,
}

/// Where the policy sends a node and whether the move is a gamble.
struct Arrow {
    stochastic: bool,
    p: f64,
    to: usize,
    /// The fallback outcome of a stochastic move.
    stay: Option<usize>,
}

fn arrow(net: &LaneNetwork, node: usize, choice: &Choice) -> Arrow {
    match (&net.model.actions[node][choice.action()], choice) {
        (Action::Urgency(m), Choice::Urgency { p, .. }) => match *p {
            p if p <= 0.0 => Arrow { stochastic: false, p: 0.0, to: m.stay, stay: None },
            p if p >= 1.0 => Arrow { stochastic: false, p: 1.0, to: m.switch, stay: None },
            p => Arrow { stochastic: true, p, to: m.switch, stay: Some(m.stay) },
        },
        (action, _) => {
            let succ = action.successors();
            Arrow { stochastic: !action.is_deterministic(), p: 1.0, to: succ[0], stay: succ.get(1).copied() }
        }
    }
}

fn plotdata(net: &LaneNetwork, values: &[f64], policy: &Policy) -> String {
    let mut out = String::from("node,x,y,lane,segment,value,p_star,arrow,to_x,to_y\n");
    for (i, v) in net.nodes.iter().enumerate() {
        let (p_star, kind, to) = match &policy.choices[i] {
            None => (String::new(), "none", None),
            Some(c) => {
                let a = arrow(net, i, c);
                let p = match c {
                    Choice::Urgency { p, .. } => fmt_f64(*p),
                    _ => String::new(),
                };
                (p, if a.stochastic { "stochastic" } else { "deterministic" }, net.nodes.get(a.to))
            }
        };
        let (tx, ty) = to.map_or((String::new(), String::new()), |t| (fmt_f64(t.x), fmt_f64(t.y)));
        writeln!(
            out,
            "{i},{},{},{},{},{},{p_star},{kind},{tx},{ty}",
            fmt_f64(v.x),
            fmt_f64(v.y),
            v.lane,
            v.segment,
            fmt_f64(values[i])
        )
        .unwrap();
    }
    out
}

fn dot(net: &LaneNetwork, policy: &Policy) -> String {
    let n = net.model.n;
    let name = |i: usize| if i == n { "t".to_string() } else { i.to_string() };
    let mut out = String::from("digraph policy {\n  node [shape=circle, fontsize=8];\n");
    writeln!(out, "  t [shape=doublecircle];").unwrap();
    for (i, v) in net.nodes.iter().enumerate() {
        writeln!(out, "  {i} [label=\"{}:{}:{}\", pos=\"{},{}!\"];", v.segment, v.lane, v.pos, v.x, v.y).unwrap();
    }
    for (i, c) in policy.choices.iter().enumerate() {
        let Some(c) = c else { continue };
        let a = arrow(net, i, c);
        if a.stochastic {
            writeln!(out, "  {i} -> {} [style=dashed, label=\"p={}\"];", name(a.to), fmt_f64(a.p)).unwrap();
            if let Some(s) = a.stay {
                writeln!(out, "  {i} -> {} [style=dotted];", name(s)).unwrap();
            }
        } else {
            writeln!(out, "  {i} -> {};", name(a.to)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// Certifies, solves with Dijkstra and writes the shared outputs.
fn solve_network<'a>(
    net: &'a LaneNetwork,
    outputs: &RouteOutputs,
    run: &mut Run,
    extend: impl FnOnce(&mut RoutePlan<'a>, &[f64]),
) -> Result<(), CliError> {
    let report = validate_model(&net.model);
    if let Some(v) = report.hard().next() {
        return Err(CliError::invalid(format!("network is invalid at node {}: {}", v.node, v.detail)));
    }
    let global_delta = if outputs.force {
        None
    } else {
        let report = check_mc_improved(&net.model, 0.0);
        if !report.certified {
            return Err(refusal(&report));
        }
        note(format!("certified; largest bucket width {}", report.global_delta));
        Some(report.global_delta)
    };
    run.resolve("global_delta", global_delta);
    let sol = dijkstra_solve(&net.model);
    let values = &sol.values.values;
    let policy = &sol.policy;
    let mut plan = RoutePlan {
        format: ossp::io::FORMAT_VERSION,
        global_delta,
        target: net.model.n,
        nodes: net
            .nodes
            .iter()
            .enumerate()
            .map(|(i, place)| PlanNode {
                node: i,
                place,
                value: values[i].is_finite().then_some(values[i]),
                choice: policy.choices[i].clone(),
            })
            .collect(),
        comparison: None,
        entry_preferences: None,
    };
    extend(&mut plan, values);
    run.write_json(&outputs.out, &plan)?;
    if let Some(path) = &outputs.values {
        run.write(path, &values_csv(&ValueFunction { values: values.clone() }))?;
    }
    if let Some(path) = &outputs.plotdata {
        run.write(path, &plotdata(net, values, policy))?;
    }
    if let Some(path) = &outputs.dot {
        run.write(path, &dot(net, policy))?;
    }
    Ok(())
}

fn highway_config(args: &HighwayArgs, run: &mut Run) -> Result<HighwayConfig, CliError> {
    let mut cfg: HighwayConfig = match &args.config {
        Some(path) => serde_json::from_str(&run.read(path)?)
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?,
        None => HighwayConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = args.$field { cfg.$field = v; })* };
    }
    set!(length, lanes, d, alpha, eps, g1, mu);
    if let Some(r) = args.onramp {
        cfg.onramp = Some(r);
    }
    if args.no_onramp {
        cfg.onramp = None;
    }
    if let Some(t) = args.target_lane {
        cfg.target_lane = Some(t);
    }
    if let Some(lsm) = &args.lsm {
        cfg.lsm = lsm.family(args.rbc_delta);
    }
    if let Some(end) = args.end {
        cfg.end = match end {
            EndArg::VirtualForced => EndTopology::VirtualForced,
            EndArg::VirtualColumn => EndTopology::VirtualColumn,
        };
    }
    let positive = |v: f64| v > 0.0 && v.is_finite();
    let non_negative = |v: f64| v >= 0.0 && v.is_finite();
    if cfg.lanes == 0 || !positive(cfg.d) || !(cfg.length >= cfg.d) || !cfg.length.is_finite() {
        return Err(CliError::invalid("need at least one lane, D > 0 and length ≥ D"));
    }
    if ![cfg.alpha, cfg.eps, cfg.g1, cfg.mu].into_iter().all(non_negative) {
        return Err(CliError::invalid("alpha, eps, g1 and mu must be non-negative"));
    }
    if cfg.target_lane() >= cfg.lanes {
        return Err(CliError::invalid("target lane out of range"));
    }
    if cfg.onramp.is_some_and(|r| !(0.0..=cfg.length).contains(&r)) {
        return Err(CliError::invalid("onramp must lie on the road"));
    }
    Ok(cfg)
}

pub fn highway(args: &HighwayArgs, run: &mut Run) -> Result<(), CliError> {
    let cfg = highway_config(args, run)?;
    run.resolve("config", &cfg);
    let net = build_highway(&cfg).map_err(|e| CliError::invalid(e.to_string()))?;
    let cmp = compare_stp_sp(&net);
    note(format!(
        "expected-cost reduction over the deterministic plan: median {:.4}%, mean {:.4}%, max {:.4}%",
        cmp.median * 100.0,
        cmp.mean * 100.0,
        cmp.max * 100.0
    ));
    solve_network(&net, &args.outputs, run, |plan, _| {
        plan.comparison = Some(Summary { median: cmp.median, mean: cmp.mean, max: cmp.max });
    })?;
    if let Some(path) = &args.compare {
        let mut out = String::from("node,stp,sp,reduction\n");
        for c in &cmp.per_node {
            writeln!(out, "{},{},{},{}", c.node, fmt_f64(c.stp), fmt_f64(c.sp), fmt_f64(c.reduction)).unwrap();
        }
        run.write(path, &out)?;
    }
    Ok(())
}

pub fn roundabout(args: &RoundaboutArgs, run: &mut Run) -> Result<(), CliError> {
    let cfg: RoundaboutConfig = match &args.config {
        Some(path) => serde_json::from_str(&run.read(path)?)
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?,
        None => RoundaboutConfig::default(),
    };
    run.resolve("config", &cfg);
    let net = build_roundabout(&cfg).map_err(|e| match e {
        RoundaboutError::CausalityRefused { .. } => CliError::refused(e.to_string()),
        RoundaboutError::Invalid(_) => CliError::invalid(e.to_string()),
    })?;
    let roads: Vec<String> = cfg.roads.iter().map(|r| r.name.clone()).collect();
    solve_network(&net, &args.outputs, run, |plan, values| {
        let prefs = roads.iter().map(|r| (r.clone(), entry_preference(&net, values, r))).collect();
        plan.entry_preferences = Some(prefs);
    })
}
