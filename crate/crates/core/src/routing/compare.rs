//! Stochastic plan (STP) versus the deterministic plan (SP).

use serde::Serialize;

use super::LaneNetwork;
use crate::labelset::{deterministic_shortest_path, dijkstra_solve};
use crate::model::{Action, OsspModel};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeReduction {
    pub node: usize,
    pub stp: f64,
    pub sp: f64,
    /// `(U_SP - U_STP) / U_SP`.
    pub reduction: f64,
}

/// Relative cost reductions, as fractions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub per_node: Vec<NodeReduction>,
}

/// Deterministic arcs seen by the SP planner: every deterministic action,
/// and for each urgency mode the stay at `K(0)` and the forced switch at
/// `K(1)`.
pub fn deterministic_arcs(model: &OsspModel) -> Vec<(usize, usize, f64)> {
    let mut arcs = Vec::new();
    for (i, set) in model.actions.iter().enumerate() {
        for a in set {
            match a {
                Action::Finite(f) if f.is_deterministic() => arcs.push((i, f.transitions[0].0, f.cost)),
                Action::Finite(_) => {}
                Action::Urgency(u) => {
                    arcs.push((i, u.stay, u.curve.eval(0.0)));
                    arcs.push((i, u.switch, u.curve.eval(1.0)));
                }
                Action::Simplex(s) => {
                    for (j, &v) in s.successors.iter().enumerate() {
                        let mut xi = vec![0.0; s.successors.len()];
                        xi[j] = 1.0;
                        arcs.push((i, v, s.cost(&xi)));
                    }
                }
            }
        }
    }
    arcs
}

/// Solves the network with OSSP Dijkstra (STP) and with classic Dijkstra on
/// the deterministic arcs (SP), and aggregates the per-node relative
/// reductions over non-virtual nodes with finite positive SP cost.
pub fn compare_stp_sp(network: &LaneNetwork) -> Comparison {
    let model = &network.model;
    let stp = dijkstra_solve(model);
    let (sp, _) = deterministic_shortest_path(model.n + 1, &deterministic_arcs(model), model.n);
    let mut per_node = Vec::new();
    for (node, info) in network.nodes.iter().enumerate() {
        let (u, w) = (stp.values[node], sp[node]);
        if info.segment == "virtual" || !w.is_finite() || w <= 0.0 {
            continue;
        }
        per_node.push(NodeReduction { node, stp: u, sp: w, reduction: (w - u) / w });
    }
    let mut r: Vec<f64> = per_node.iter().map(|x| x.reduction).collect();
    r.sort_by(f64::total_cmp);
    let (median, mean, max) = if r.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        let k = r.len();
        let median = if k % 2 == 1 { r[k / 2] } else { 0.5 * (r[k / 2 - 1] + r[k / 2]) };
        (median, r.iter().sum::<f64>() / k as f64, r[k - 1])
    };
    Comparison { median, mean, max, per_node }
}
