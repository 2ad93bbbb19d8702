//! Structural checks of the modelling assumptions.

use serde::Serialize;

use crate::model::{Action, OsspModel, Support, PROB_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Non-target node without actions.
    EmptyActionSet,
    /// Cost not strictly positive.
    NonPositiveCost,
    /// Probability outside `[0, 1]` or a sum different from 1.
    Probability,
    /// Successor index out of range or repeated.
    BadSuccessor,
    /// Positive probability of staying put.
    SelfTransition,
    /// Urgency support missing 0 or 1, unsorted, or stay equal to switch.
    UrgencySupport,
    /// A stochastic successor without a deterministic action to it.
    Ossp,
    /// Target unreachable from the node under every policy. Soft.
    Unreachable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: usize,
    pub action: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// True when nothing but reachability warnings were found.
    pub fn is_valid(&self) -> bool {
        self.hard().next().is_none()
    }

    pub fn hard(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.kind != ViolationKind::Unreachable)
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

pub fn validate_model(model: &OsspModel) -> ValidationReport {
    let mut out = Vec::new();
    let n = model.n;
    let mut push = |kind, node, action: Option<usize>, detail: String| out.push(Violation { kind, node, action, detail });
    if model.actions.len() != n {
        push(ViolationKind::EmptyActionSet, 0, None, format!("{} action sets for {} nodes", model.actions.len(), n));
        return ValidationReport { violations: out };
    }

    for (i, set) in model.actions.iter().enumerate() {
        if set.is_empty() {
            push(ViolationKind::EmptyActionSet, i, None, "no actions".into());
        }
        let deterministic: Vec<usize> = deterministic_targets(set);
        for (a, action) in set.iter().enumerate() {
            let succ = action.successors();
            let mut sorted = succ.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != succ.len() || succ.iter().any(|&j| j > n) {
                push(ViolationKind::BadSuccessor, i, Some(a), format!("successors {succ:?}"));
                continue;
            }
            match action {
                Action::Finite(f) => {
                    if !(f.cost > 0.0) || !f.cost.is_finite() {
                        push(ViolationKind::NonPositiveCost, i, Some(a), format!("cost {}", f.cost));
                    }
                    let sum: f64 = f.transitions.iter().map(|t| t.1).sum();
                    if f.transitions.iter().any(|t| !(t.1 > 0.0 && t.1 <= 1.0)) || (sum - 1.0).abs() > PROB_TOL {
                        push(ViolationKind::Probability, i, Some(a), format!("probabilities sum to {sum}"));
                    }
                    if f.transitions.iter().any(|t| t.0 == i) {
                        push(ViolationKind::SelfTransition, i, Some(a), "p(x,a,x) > 0".into());
                    }
                }
                Action::Urgency(m) => {
                    if m.stay == i || m.switch == i {
                        push(ViolationKind::SelfTransition, i, Some(a), "mode outcome equals its node".into());
                    }
                    let ps = match &m.support {
                        Support::Points(ps) => {
                            let ok = ps.first() == Some(&0.0)
                                && ps.last() == Some(&1.0)
                                && ps.windows(2).all(|w| w[0] < w[1]);
                            if !ok {
                                push(ViolationKind::UrgencySupport, i, Some(a), format!("support {ps:?}"));
                            }
                            ps.clone()
                        }
                        Support::Interval => (0..=100).map(|k| k as f64 / 100.0).collect(),
                    };
                    if let Some(&p) = ps.iter().find(|&&p| !(m.curve.eval(p) > 0.0)) {
                        push(ViolationKind::NonPositiveCost, i, Some(a), format!("K({p}) = {}", m.curve.eval(p)));
                    }
                }
                Action::Simplex(s) => {
                    if s.successors.contains(&i) {
                        push(ViolationKind::SelfTransition, i, Some(a), "simplex vertex equals its node".into());
                    }
                    if s.offsets.len() != s.successors.len() {
                        push(ViolationKind::BadSuccessor, i, Some(a), "offset count mismatch".into());
                    }
                }
            }
            if succ.len() > 1 {
                for j in succ {
                    if !deterministic.contains(&j) && !mode_reaches_deterministically(action, j) {
                        push(ViolationKind::Ossp, i, Some(a), format!("no deterministic action to {j}"));
                    }
                }
            }
        }
    }

    for i in unreachable_nodes(model) {
        push(ViolationKind::Unreachable, i, None, "target unreachable".into());
    }
    ValidationReport { violations: out }
}

/// Deterministic successors of a node's finite actions.
fn deterministic_targets(set: &[Action]) -> Vec<usize> {
    set.iter()
        .filter_map(|a| match a {
            Action::Finite(f) if f.is_deterministic() => Some(f.transitions[0].0),
            _ => None,
        })
        .collect()
}

/// Modes contain their own vertex actions (`p ∈ {0,1}`, simplex vertices).
fn mode_reaches_deterministically(action: &Action, _j: usize) -> bool {
    matches!(action, Action::Urgency(_) | Action::Simplex(_))
}

/// Nodes with no path to the target in the union transition digraph.
pub fn unreachable_nodes(model: &OsspModel) -> Vec<usize> {
    let n = model.n;
    let mut preds = vec![Vec::new(); n + 1];
    for (i, set) in model.actions.iter().enumerate() {
        for action in set {
            for j in action.successors() {
                if j <= n {
                    preds[j].push(i);
                }
            }
        }
    }
    let mut seen = vec![false; n + 1];
    seen[n] = true;
    let mut stack = vec![n];
    while let Some(j) = stack.pop() {
        for &i in &preds[j] {
            if !seen[i] {
                seen[i] = true;
                stack.push(i);
            }
        }
    }
    (0..n).filter(|&i| !seen[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_transition_flagged() {
        let mut m = OsspModel::new(1);
        m.add_finite(0, 1.0, vec![(0, 0.3), (1, 0.7)]);
        m.add_deterministic(0, 1, 1.0);
        let r = validate_model(&m);
        assert!(r.has(ViolationKind::SelfTransition));
    }

    #[test]
    fn missing_deterministic_action_flagged() {
        let mut m = OsspModel::new(2);
        m.add_finite(0, 1.0, vec![(1, 0.5), (2, 0.5)]);
        m.add_deterministic(0, 1, 1.0);
        m.add_deterministic(1, 2, 1.0);
        let r = validate_model(&m);
        assert!(r.has(ViolationKind::Ossp));
        assert!(!r.is_valid());
    }

    #[test]
    fn unreachable_is_soft() {
        let mut m = OsspModel::new(3);
        m.add_deterministic(0, 3, 1.0);
        m.add_deterministic(1, 2, 1.0);
        m.add_deterministic(2, 1, 1.0);
        let r = validate_model(&m);
        assert!(r.has(ViolationKind::Unreachable));
        assert!(r.is_valid());
    }
}
