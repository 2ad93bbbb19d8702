//! OSSP data model.
//!
//! Nodes are `0..n`; the target is the extra index `n` and carries no actions.
//! Unreachable values are `f64::INFINITY`, which saturates under addition.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::CostCurve;
use crate::hjb::geometry::Vec3;
use crate::hjb::profile::SpeedProfile;

/// Tolerance on probability sums.
pub const PROB_TOL: f64 = 1e-12;

/// A pure action: positive cost and a distribution over successors.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteAction {
    pub cost: f64,
    pub transitions: Vec<(usize, f64)>,
}

impl FiniteAction {
    pub fn new(cost: f64, transitions: Vec<(usize, f64)>) -> Self {
        FiniteAction { cost, transitions }
    }

    pub fn deterministic(cost: f64, to: usize) -> Self {
        FiniteAction { cost, transitions: vec![(to, 1.0)] }
    }

    pub fn is_deterministic(&self) -> bool {
        self.transitions.len() == 1
    }
}

/// Urgency values available in a lane-change mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    /// Increasing list starting at 0 and ending at 1.
    Points(Vec<f64>),
    /// The whole interval `[0, 1]`.
    Interval,
}

/// Two-outcome mode: with probability `p` the switch succeeds, otherwise the
/// vehicle stays. The cost `K(p)` comes from the curve.
#[derive(Clone, Debug, PartialEq)]
pub struct UrgencyMode {
    pub stay: usize,
    pub switch: usize,
    pub curve: CostCurve,
    pub support: Support,
}

impl UrgencyMode {
    pub fn new(stay: usize, switch: usize, curve: CostCurve, support: Support) -> Self {
        UrgencyMode { stay, switch, curve, support }
    }

    /// Mode whose support is the knot set of a tabulated curve.
    pub fn tabulated(stay: usize, switch: usize, curve: CostCurve) -> Self {
        let support = match curve.knots() {
            Some(knots) => Support::Points(knots.iter().map(|k| k.0).collect()),
            None => Support::Interval,
        };
        UrgencyMode { stay, switch, curve, support }
    }
}

/// Semi-Lagrangian simplex mode: any `ξ` in the probability simplex over the
/// vertices, with cost `|Σ ξ_j z_j| / f(direction)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexMode {
    pub successors: Vec<usize>,
    pub offsets: Vec<Vec3>,
    pub profile: Arc<SpeedProfile>,
}

impl SimplexMode {
    pub fn cost(&self, xi: &[f64]) -> f64 {
        crate::hjb::geometry::simplex_cost(&self.offsets, &self.profile, xi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Finite(FiniteAction),
    Urgency(UrgencyMode),
    Simplex(SimplexMode),
}

impl Action {
    /// Successors in storage order.
    pub fn successors(&self) -> Vec<usize> {
        match self {
            Action::Finite(a) => a.transitions.iter().map(|t| t.0).collect(),
            Action::Urgency(m) => vec![m.stay, m.switch],
            Action::Simplex(s) => s.successors.clone(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Action::Finite(a) if a.is_deterministic())
    }
}

impl From<FiniteAction> for Action {
    fn from(a: FiniteAction) -> Self {
        Action::Finite(a)
    }
}

impl From<UrgencyMode> for Action {
    fn from(m: UrgencyMode) -> Self {
        Action::Urgency(m)
    }
}

/// An OSSP instance. `actions[i]` is the action set of node `i < n`.
#[derive(Clone, Debug, PartialEq)]
pub struct OsspModel {
    pub n: usize,
    pub actions: Vec<Vec<Action>>,
    pub labels: Option<Vec<String>>,
}

impl OsspModel {
    pub fn new(n: usize) -> Self {
        OsspModel { n, actions: vec![Vec::new(); n], labels: None }
    }

    pub fn target(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, node: usize, action: impl Into<Action>) -> usize {
        self.actions[node].push(action.into());
        self.actions[node].len() - 1
    }

    pub fn add_deterministic(&mut self, node: usize, to: usize, cost: f64) -> usize {
        self.push(node, FiniteAction::deterministic(cost, to))
    }

    pub fn add_finite(&mut self, node: usize, cost: f64, transitions: Vec<(usize, f64)>) -> usize {
        self.push(node, FiniteAction::new(cost, transitions))
    }

    pub fn action_count(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    /// Predecessor lists: for each node `j`, the pairs `(i, action)` whose
    /// support contains `j`.
    pub fn predecessors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut preds = vec![Vec::new(); self.n + 1];
        for (i, set) in self.actions.iter().enumerate() {
            for (a, action) in set.iter().enumerate() {
                for j in action.successors() {
                    if j <= self.n {
                        preds[j].push((i, a));
                    }
                }
            }
        }
        preds
    }
}

/// The action picked at a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Choice {
    Finite { action: usize },
    Urgency { action: usize, p: f64 },
    Simplex { action: usize, xi: Vec<f64> },
}

impl Choice {
    pub fn action(&self) -> usize {
        match self {
            Choice::Finite { action } | Choice::Urgency { action, .. } | Choice::Simplex { action, .. } => *action,
        }
    }
}

/// Values for nodes `0..=n`; `values[n]` is the target and always 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueFunction {
    pub values: Vec<f64>,
}

impl ValueFunction {
    pub fn infinite(n: usize) -> Self {
        let mut values = vec![f64::INFINITY; n + 1];
        values[n] = 0.0;
        ValueFunction { values }
    }

    pub fn max_abs_diff(&self, other: &ValueFunction) -> f64 {
        sup_diff(&self.values, &other.values)
    }
}

impl std::ops::Index<usize> for ValueFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Sup-norm distance where two infinities are equal and an infinity against a
/// finite value is infinitely far.
pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == y {
                0.0
            } else if x.is_infinite() || y.is_infinite() {
                f64::INFINITY
            } else {
                (x - y).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// One entry per non-target node; `None` where the node cannot reach the target.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub choices: Vec<Option<Choice>>,
}
