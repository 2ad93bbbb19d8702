//! Interconnected roundabouts: an outer ring driven clockwise, an inner ring
//! driven counterclockwise, and one mini-ring per road bridging the two.
//!
//! Each road has a two-lane approach. Its left lane enters the outer ring,
//! its right lane enters the road's mini-ring, and lane changes along the
//! approach are urgency modes with `K(p) = β p² + γ`, plus the entry
//! surcharge `f` on the last column. Ring arcs are deterministic at the
//! ring's `γ`. The exit road leaves the outer ring (left lane) and its
//! mini-ring (right lane); the target is the end of its left lane.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LaneNetwork, LaneNode};
use crate::curve::CostCurve;
use crate::model::{Action, FiniteAction, OsspModel, Support, UrgencyMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoundaboutError {
    #[error("causality refused at {segment} column {column}: β = {beta} > γ + f = {bound}")]
    CausalityRefused { segment: String, column: usize, beta: f64, bound: f64 },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentCost {
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Road {
    pub name: String,
    /// Outer-ring node where the road attaches.
    pub outer_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoundaboutConfig {
    pub outer_nodes: usize,
    pub inner_nodes: usize,
    pub mini_nodes: usize,
    pub approach_columns: usize,
    pub exit_columns: usize,
    pub roads: Vec<Road>,
    /// Index into `roads` of the road holding the target.
    pub exit_road: usize,
    pub approach: SegmentCost,
    pub exit: SegmentCost,
    pub outer_gamma: f64,
    pub inner_gamma: f64,
    pub mini_gamma: f64,
    /// Surcharge `f` on entering a ring from a road.
    pub entry_surcharge: f64,
}

impl Default for RoundaboutConfig {
    fn default() -> Self {
        let road = |name: &str, outer_index| Road { name: name.into(), outer_index };
        RoundaboutConfig {
            outer_nodes: 24,
            inner_nodes: 12,
            mini_nodes: 4,
            approach_columns: 6,
            exit_columns: 3,
            roads: vec![road("north", 0), road("southeast", 8), road("southwest", 20)],
            exit_road: 1,
            approach: SegmentCost { beta: 1.0, gamma: 1.0 },
            exit: SegmentCost { beta: 1.0, gamma: 1.0 },
            outer_gamma: 3.0,
            inner_gamma: 6.8,
            mini_gamma: 1.0,
            entry_surcharge: 5.0,
        }
    }
}

/// Which ring an approach feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ring {
    Outer,
    Inner,
}

/// Lane conventions on two-lane roads.
const LEFT: usize = 0;
const RIGHT: usize = 1;

struct Builder {
    nodes: Vec<LaneNode>,
    actions: Vec<Vec<Action>>,
}

impl Builder {
    fn add(&mut self, segment: String, lane: usize, pos: usize, xy: (f64, f64)) -> usize {
        self.nodes.push(LaneNode { lane, pos, x: xy.0, y: xy.1, segment });
        self.actions.push(Vec::new());
        self.nodes.len() - 1
    }
}

fn polar(radius: f64, angle: f64) -> (f64, f64) {
    (radius * angle.cos(), radius * angle.sin())
}

/// Angle of outer-ring node `k`, clockwise from north.
fn outer_angle(k: usize, count: usize) -> f64 {
    std::f64::consts::FRAC_PI_2 - std::f64::consts::TAU * k as f64 / count as f64
}

/// Builds the network after checking `β ≤ γ + f` on every lane-change node.
pub fn build_roundabout(cfg: &RoundaboutConfig) -> Result<LaneNetwork, RoundaboutError> {
    validate(cfg)?;
    let mut b = Builder { nodes: Vec::new(), actions: Vec::new() };
    let (no, ni, nm) = (cfg.outer_nodes, cfg.inner_nodes, cfg.mini_nodes);
    let outer: Vec<usize> = (0..no).map(|k| b.add("outer".into(), 0, k, polar(10.0, outer_angle(k, no)))).collect();
    let inner: Vec<usize> = (0..ni).map(|j| b.add("inner".into(), 0, j, polar(5.0, outer_angle(j, ni)))).collect();
    let inner_of = |k: usize| (k * ni + no / 2) / no % ni;
    let mut minis = Vec::new();
    for road in &cfg.roads {
        let centre = polar(7.5, outer_angle(road.outer_index, no));
        let ids: Vec<usize> = (0..nm)
            .map(|q| {
                let off = polar(1.2, std::f64::consts::TAU * q as f64 / nm as f64);
                b.add(format!("mini:{}", road.name), 0, q, (centre.0 + off.0, centre.1 + off.1))
            })
            .collect();
        minis.push(ids);
    }
    let det = |cost: f64, to: usize| Action::Finite(FiniteAction::deterministic(cost, to));
    for k in 0..no {
        b.actions[outer[k]].push(det(cfg.outer_gamma, outer[(k + 1) % no]));
    }
    for j in 0..ni {
        b.actions[inner[j]].push(det(cfg.inner_gamma, inner[(j + ni - 1) % ni]));
    }
    // Mini-ring q0 takes entries, q1 feeds the inner ring, q2 takes the inner
    // ring's exits, q3 feeds the outer ring.
    for (r, road) in cfg.roads.iter().enumerate() {
        let m = &minis[r];
        let (k, j) = (road.outer_index, inner_of(road.outer_index));
        for q in 0..nm {
            b.actions[m[q]].push(det(cfg.mini_gamma, m[(q + 1) % nm]));
        }
        b.actions[m[1 % nm]].push(det(cfg.mini_gamma, inner[j]));
        b.actions[inner[j]].push(det(cfg.inner_gamma, m[2 % nm]));
        b.actions[m[3 % nm]].push(det(cfg.mini_gamma, outer[k]));
        b.actions[outer[k]].push(det(cfg.outer_gamma, m[0]));
    }
    for (r, road) in cfg.roads.iter().enumerate() {
        let angle = outer_angle(road.outer_index, no);
        let lateral = polar(0.3, angle - std::f64::consts::FRAC_PI_2);
        let at = |lane: usize, radius: f64, side: f64| {
            let base = polar(radius, angle);
            let s = if lane == LEFT { side } else { -side };
            (base.0 + s * lateral.0, base.1 + s * lateral.1)
        };
        let seg = format!("approach:{}", road.name);
        let cols = cfg.approach_columns;
        let lanes: Vec<Vec<usize>> = (0..2)
            .map(|lane| (0..cols).map(|c| b.add(seg.clone(), lane, c, at(lane, 11.0 + (cols - c) as f64, 1.0))).collect())
            .collect();
        let entry = [outer[road.outer_index], minis[r][0]];
        for c in 0..cols {
            let last = c + 1 == cols;
            for lane in [LEFT, RIGHT] {
                let other = 1 - lane;
                let (stay, switch) = if last { (entry[lane], entry[other]) } else { (lanes[lane][c + 1], lanes[other][c + 1]) };
                let f = if last { cfg.entry_surcharge } else { 0.0 };
                let curve = CostCurve::quadratic(cfg.approach.beta, cfg.approach.gamma, f);
                b.actions[lanes[lane][c]].push(Action::Urgency(UrgencyMode::new(stay, switch, curve, Support::Interval)));
            }
        }
    }
    let road = &cfg.roads[cfg.exit_road];
    let angle = outer_angle(road.outer_index, no);
    let seg = format!("exit:{}", road.name);
    let cols = cfg.exit_columns;
    let mut exit = vec![Vec::new(), Vec::new()];
    for (lane, ids) in exit.iter_mut().enumerate() {
        for c in 0..cols {
            // The left lane's last cell is the target and gets no node.
            if lane == LEFT && c + 1 == cols {
                continue;
            }
            let side = if lane == LEFT { -0.6 } else { -0.9 };
            let base = polar(11.0 + c as f64, angle + side / (11.0 + c as f64));
            ids.push(b.add(seg.clone(), lane, c, base));
        }
    }
    let n = b.nodes.len();
    let cell = |lane: usize, c: usize| if lane == LEFT && c + 1 == cols { n } else { exit[lane][c] };
    b.actions[outer[road.outer_index]].push(det(cfg.outer_gamma, cell(LEFT, 0)));
    b.actions[minis[cfg.exit_road][2 % nm]].push(det(cfg.mini_gamma, cell(RIGHT, 0)));
    for c in 0..cols {
        for lane in [LEFT, RIGHT] {
            if lane == LEFT && c + 1 == cols {
                continue;
            }
            let id = cell(lane, c);
            if c + 1 == cols {
                // Forced switch into the exit lane.
                b.actions[id].push(det(cfg.exit.beta + cfg.exit.gamma, n));
                continue;
            }
            let curve = CostCurve::quadratic(cfg.exit.beta, cfg.exit.gamma, 0.0);
            let mode = UrgencyMode::new(cell(lane, c + 1), cell(1 - lane, c + 1), curve, Support::Interval);
            b.actions[id].push(Action::Urgency(mode));
        }
    }
    let model = OsspModel { n, actions: b.actions, labels: None };
    Ok(LaneNetwork { model, nodes: b.nodes, cell_length: 1.0 })
}

fn validate(cfg: &RoundaboutConfig) -> Result<(), RoundaboutError> {
    let bad = |msg: &str| Err(RoundaboutError::Invalid(msg.into()));
    if cfg.outer_nodes < 2 || cfg.inner_nodes < 2 || cfg.mini_nodes < 4 {
        return bad("rings need at least 2 nodes and mini-rings at least 4");
    }
    if cfg.approach_columns == 0 || cfg.exit_columns < 2 {
        return bad("approaches need a column and the exit two");
    }
    if cfg.exit_road >= cfg.roads.len() || cfg.roads.iter().any(|r| r.outer_index >= cfg.outer_nodes) {
        return bad("road attachment out of range");
    }
    let mut seen: Vec<usize> = cfg.roads.iter().map(|r| r.outer_index).collect();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != cfg.roads.len() {
        return bad("two roads share an attachment");
    }
    let positive = [cfg.outer_gamma, cfg.inner_gamma, cfg.mini_gamma, cfg.approach.gamma, cfg.exit.gamma];
    if positive.iter().any(|g| !(*g > 0.0)) || cfg.approach.beta < 0.0 || cfg.exit.beta < 0.0 || cfg.entry_surcharge < 0.0 {
        return bad("costs must be positive");
    }
    for road in &cfg.roads {
        for c in 0..cfg.approach_columns {
            let f = if c + 1 == cfg.approach_columns { cfg.entry_surcharge } else { 0.0 };
            let bound = cfg.approach.gamma + f;
            if cfg.approach.beta > bound {
                return Err(RoundaboutError::CausalityRefused {
                    segment: format!("approach:{}", road.name),
                    column: c,
                    beta: cfg.approach.beta,
                    bound,
                });
            }
        }
    }
    if cfg.exit.beta > cfg.exit.gamma {
        let segment = format!("exit:{}", cfg.roads[cfg.exit_road].name);
        return Err(RoundaboutError::CausalityRefused { segment, column: 0, beta: cfg.exit.beta, bound: cfg.exit.gamma });
    }
    Ok(())
}

/// Ring fed by the cheaper lane at the last approach column of `road`.
pub fn entry_preference(net: &LaneNetwork, values: &[f64], road: &str) -> Option<Ring> {
    let seg = format!("approach:{road}");
    let last = net.nodes.iter().filter(|v| v.segment == seg).map(|v| v.pos).max()?;
    let left = values[net.find(&seg, LEFT, last)?];
    let right = values[net.find(&seg, RIGHT, last)?];
    Some(if left <= right { Ring::Outer } else { Ring::Inner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate_model;

    #[test]
    fn default_network_is_valid() {
        let net = build_roundabout(&RoundaboutConfig::default()).unwrap();
        assert!(validate_model(&net.model).is_valid());
        assert_eq!(net.model.n, 24 + 12 + 3 * 4 + 3 * 12 + 5);
    }

    #[test]
    fn steep_entry_curve_refused() {
        let cfg = RoundaboutConfig { approach: SegmentCost { beta: 1.5, gamma: 1.0 }, ..Default::default() };
        assert!(matches!(build_roundabout(&cfg), Err(RoundaboutError::CausalityRefused { column: 0, .. })));
    }
}
