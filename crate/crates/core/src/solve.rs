//! Reference solvers: Bellman operator, value iteration and Gauss-Seidel.
//!
//! Iteration counts follow sweep-counting: a solve reports the number of
//! sweeps that changed the iterate by more than `tol`. The confirming sweep
//! that detects convergence is performed but not counted, so a one-edge chain
//! converges in 1 sweep.

use thiserror::Error;

use crate::hjb::geometry::simplex_minimize;
use crate::model::{sup_diff, Action, Choice, FiniteAction, OsspModel, Policy, ValueFunction};
use crate::routing::urgency::{minimize_urgency, urgency_value};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no convergence after {iterations} sweeps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("ordering is not a permutation of the non-target nodes")]
    BadOrdering,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub values: ValueFunction,
    pub policy: Policy,
    pub iterations: usize,
}

/// Best sub-action of `action` that only uses successors accepted by
/// `usable`, evaluated against `values`.
///
/// Finite actions need their whole support. Urgency modes fall back to `p = 0`
/// or `p = 1` when only one outcome is usable; simplex modes minimize over the
/// face of usable vertices.
pub fn evaluate_restricted(
    action: &Action,
    index: usize,
    values: &[f64],
    usable: impl Fn(usize) -> bool,
) -> Option<(f64, Choice)> {
    match action {
        Action::Finite(a) => {
            if !a.transitions.iter().all(|&(j, _)| usable(j)) {
                return None;
            }
            let v = a.cost + a.transitions.iter().map(|&(j, p)| p * values[j]).sum::<f64>();
            Some((v, Choice::Finite { action: index }))
        }
        Action::Urgency(m) => {
            let (p, v) = match (usable(m.stay), usable(m.switch)) {
                (true, true) => minimize_urgency(&m.curve, &m.support, values[m.stay], values[m.switch]),
                (true, false) => (0.0, urgency_value(&m.curve, 0.0, values[m.stay], 0.0)),
                (false, true) => (1.0, urgency_value(&m.curve, 1.0, 0.0, values[m.switch])),
                (false, false) => return None,
            };
            Some((v, Choice::Urgency { action: index, p }))
        }
        Action::Simplex(s) => {
            let face: Vec<usize> = (0..s.successors.len()).filter(|&k| usable(s.successors[k])).collect();
            if face.is_empty() {
                return None;
            }
            let offsets: Vec<_> = face.iter().map(|&k| s.offsets[k]).collect();
            let u: Vec<f64> = face.iter().map(|&k| values[s.successors[k]]).collect();
            let (v, local) = simplex_minimize(&offsets, &s.profile, &u);
            let mut xi = vec![0.0; s.successors.len()];
            for (w, &k) in local.iter().zip(&face) {
                xi[k] = *w;
            }
            Some((v, Choice::Simplex { action: index, xi }))
        }
    }
}

/// `𝓕_i(a, W)` for a concrete choice; `+∞` when a used successor is `+∞`.
pub fn expected_cost(model: &OsspModel, node: usize, choice: &Choice, values: &[f64]) -> f64 {
    let action = &model.actions[node][choice.action()];
    match (action, choice) {
        (Action::Finite(a), _) => {
            let mut v = a.cost;
            for &(j, p) in &a.transitions {
                v += p * values[j];
            }
            v
        }
        (Action::Urgency(m), Choice::Urgency { p, .. }) => {
            let (s, w) = (values[m.stay], values[m.switch]);
            if (*p < 1.0 && s.is_infinite()) || (*p > 0.0 && w.is_infinite()) {
                return f64::INFINITY;
            }
            urgency_value(&m.curve, *p, if *p < 1.0 { s } else { 0.0 }, if *p > 0.0 { w } else { 0.0 })
        }
        (Action::Simplex(s), Choice::Simplex { xi, .. }) => {
            let mut v = s.cost(xi);
            for (&j, &w) in s.successors.iter().zip(xi) {
                if w > 0.0 {
                    v += w * values[j];
                }
            }
            v
        }
        _ => panic!("choice kind does not match action kind"),
    }
}

/// Finite action with a self-transition, evaluated at its own fixed point
/// `(C + Σ_{j≠i} p_j W_j) / (1 - p_ii)` so that iteration from `+∞` is not
/// stuck at nodes whose every action may stay put.
fn evaluate_self_loop(a: &FiniteAction, index: usize, node: usize, values: &[f64]) -> Option<(f64, Choice)> {
    let stay: f64 = a.transitions.iter().filter(|t| t.0 == node).map(|t| t.1).sum();
    if stay >= 1.0 || a.transitions.iter().any(|&(j, _)| j != node && !values[j].is_finite()) {
        return None;
    }
    let rest: f64 = a.transitions.iter().filter(|t| t.0 != node).map(|&(j, p)| p * values[j]).sum();
    Some(((a.cost + rest) / (1.0 - stay), Choice::Finite { action: index }))
}

/// `min_a 𝓕_i(a, W)` with ties to the lowest action index.
pub fn bellman_update(model: &OsspModel, node: usize, values: &[f64]) -> (f64, Option<Choice>) {
    let mut best = (f64::INFINITY, None);
    for (a, action) in model.actions[node].iter().enumerate() {
        let result = match action {
            Action::Finite(f) if f.transitions.iter().any(|t| t.0 == node) => evaluate_self_loop(f, a, node, values),
            _ => evaluate_restricted(action, a, values, |j| values[j].is_finite()),
        };
        if let Some((v, c)) = result {
            if v < best.0 {
                best = (v, Some(c));
            }
        }
    }
    best
}

/// Greedy policy with respect to `values`.
pub fn greedy_policy(model: &OsspModel, values: &[f64]) -> Policy {
    Policy { choices: (0..model.n).map(|i| bellman_update(model, i, values).1).collect() }
}

/// Jacobi value iteration from `W⁰ = +∞` (target 0).
pub fn value_iteration(model: &OsspModel, tol: f64, max_iters: usize) -> Result<Solution, SolveError> {
    let mut w = ValueFunction::infinite(model.n).values;
    let mut changed = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..=max_iters {
        let mut next = w.clone();
        for (i, slot) in next.iter_mut().enumerate().take(model.n) {
            *slot = bellman_update(model, i, &w).0;
        }
        residual = sup_diff(&next, &w);
        w = next;
        if residual <= tol {
            let policy = greedy_policy(model, &w);
            return Ok(Solution { values: ValueFunction { values: w }, policy, iterations: changed });
        }
        changed += 1;
    }
    Err(SolveError::NonConvergence { iterations: changed, residual })
}

/// Value iteration with the default tolerance and `10·n` sweeps.
pub fn value_iteration_default(model: &OsspModel) -> Result<Solution, SolveError> {
    value_iteration(model, DEFAULT_TOL, 10 * model.n.max(1))
}

/// In-place sweeps over `ordering`, a permutation of `0..n`.
pub fn gauss_seidel_solve(
    model: &OsspModel,
    ordering: &[usize],
    tol: f64,
    max_sweeps: usize,
) -> Result<Solution, SolveError> {
    let mut seen = vec![false; model.n];
    if ordering.len() != model.n || ordering.iter().any(|&i| i >= model.n || std::mem::replace(&mut seen[i], true)) {
        return Err(SolveError::BadOrdering);
    }
    let mut w = ValueFunction::infinite(model.n).values;
    let mut changed = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..=max_sweeps {
        residual = 0.0f64;
        for &i in ordering {
            let v = bellman_update(model, i, &w).0;
            residual = residual.max(sup_diff(&[v], &[w[i]]));
            w[i] = v;
        }
        if residual <= tol {
            let policy = greedy_policy(model, &w);
            return Ok(Solution { values: ValueFunction { values: w }, policy, iterations: changed });
        }
        changed += 1;
    }
    Err(SolveError::NonConvergence { iterations: changed, residual })
}

/// Cycle detection on the union transition digraph. Returns an ordering in
/// which every node comes after all of its successors, so a single
/// Gauss-Seidel sweep along it is exact.
pub fn is_explicitly_causal(model: &OsspModel) -> Option<Vec<usize>> {
    let n = model.n;
    let succ: Vec<Vec<usize>> = model
        .actions
        .iter()
        .map(|set| {
            let mut s: Vec<usize> = set.iter().flat_map(Action::successors).filter(|&j| j < n).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut pending: Vec<usize> = succ.iter().map(Vec::len).collect();
    let mut preds = vec![Vec::new(); n];
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            preds[j].push(i);
        }
    }
    let mut ready: std::collections::VecDeque<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(j) = ready.pop_front() {
        order.push(j);
        for &i in &preds[j] {
            pending[i] -= 1;
            if pending[i] == 0 {
                ready.push_back(i);
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CostCurve;
    use crate::model::{FiniteAction, Support, UrgencyMode};

    fn two_node() -> OsspModel {
        // A = 0, B = 1, t = 2.
        let mut m = OsspModel::new(2);
        m.add_deterministic(0, 2, 3.0);
        m.add_finite(0, 1.0, vec![(2, 0.5), (1, 0.5)]);
        m.add_deterministic(0, 1, 5.0);
        m.add_deterministic(1, 2, 1.0);
        m
    }

    #[test]
    fn expected_cost_examples() {
        let mut m = OsspModel::new(3);
        m.add_finite(0, 2.0, vec![(1, 0.5), (2, 0.5)]);
        let w = [f64::INFINITY, 0.0, 4.0, 0.0];
        assert_eq!(expected_cost(&m, 0, &Choice::Finite { action: 0 }, &w), 4.0);

        let mut u = OsspModel::new(2);
        u.push(0, UrgencyMode::new(1, 2, CostCurve::quadratic(1.0, 2.0, 0.0), Support::Interval));
        let w = [f64::INFINITY, 1.0, 0.0];
        let v = expected_cost(&u, 0, &Choice::Urgency { action: 0, p: 0.5 }, &w);
        assert!((v - 2.75).abs() < 1e-15);
    }

    #[test]
    fn bellman_picks_stochastic_action() {
        let m = two_node();
        let (v, c) = bellman_update(&m, 0, &[f64::INFINITY, 1.0, 0.0]);
        assert_eq!(v, 1.5);
        assert_eq!(c, Some(Choice::Finite { action: 1 }));
    }

    #[test]
    fn value_iteration_two_node_fixed_point() {
        let s = value_iteration_default(&two_node()).unwrap();
        assert_eq!(s.values.values, vec![1.5, 1.0, 0.0]);
    }

    #[test]
    fn chain_converges_in_one_sweep() {
        let mut m = OsspModel::new(1);
        m.add_deterministic(0, 1, 1.0);
        let s = value_iteration_default(&m).unwrap();
        assert_eq!(s.values[0], 1.0);
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn non_convergence_reported() {
        let mut m = OsspModel::new(3);
        m.add_deterministic(2, 3, 1.0);
        m.add_deterministic(1, 2, 1.0);
        m.add_deterministic(0, 1, 1.0);
        assert!(matches!(value_iteration(&m, 1e-10, 1), Err(SolveError::NonConvergence { .. })));
    }

    #[test]
    fn quadratic_mode_bellman() {
        let mut m = OsspModel::new(2);
        m.push(0, UrgencyMode::new(1, 2, CostCurve::quadratic(1.0, 2.0, 0.0), Support::Interval));
        let (v, c) = bellman_update(&m, 0, &[f64::INFINITY, 10.0, 0.0]);
        assert_eq!(v, 3.0);
        assert_eq!(c, Some(Choice::Urgency { action: 0, p: 1.0 }));
    }

    #[test]
    fn infinite_successor_saturates() {
        let mut m = OsspModel::new(2);
        m.push(0, FiniteAction::new(1.0, vec![(1, 0.5), (2, 0.5)]));
        let w = [f64::INFINITY, f64::INFINITY, 0.0];
        assert_eq!(expected_cost(&m, 0, &Choice::Finite { action: 0 }, &w), f64::INFINITY);
        assert_eq!(bellman_update(&m, 0, &w).0, f64::INFINITY);
    }
}
