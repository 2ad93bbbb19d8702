//! Monotone (δ-)causality certification.
//!
//! A node is checked by turning every stochastic point `(ξ, C)` and every
//! `r ∈ supp ξ` into a linear inequality in `δ`:
//!
//! ```text
//! C  ≥  (1 - ξ_r) Č(γ_r) + ξ_r δ      (improved)
//! C  ≥  Σ_{j≠r} ξ_j C_j  + ξ_r δ      (simplified)
//! ```
//!
//! Deterministic actions contribute `C ≥ δ`. The largest `δ` meeting all of
//! them is the node's `δ⋆`. Continuous modes are sampled; interval urgency
//! modes also get the endpoint limits `K(1) - K'(1) ≥ δ` and `K(0) + K'(0) ≥ δ`
//! whenever the endpoint is the cheapest way to reach that successor.

use serde::Serialize;
use thiserror::Error;

use crate::model::{Action, OsspModel, Support};
use crate::pruning::{classify_points, convexified_cost, oblique_projection, CostPoint, Usefulness};

/// Relative tolerance below which an inequality counts as satisfied.
pub const CAUSALITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CausalityError {
    #[error("node {node} has a stochastic transition to {successor} but no deterministic action to it")]
    MissingDeterministicAction { node: usize, successor: usize },
    #[error("node {node} does not lead into exactly two successors")]
    NotTwoSuccessors { node: usize },
    #[error("node {node} is not monotone causal (δ⋆ = {delta_star})")]
    NotMonotoneCausal { node: usize, delta_star: f64 },
    #[error("inequality already holds: {lhs} ≥ {rhs}")]
    ConditionNotViolated { lhs: f64, rhs: f64 },
    #[error("invalid counterexample parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Improved,
    Simplified,
}

/// Sampling density for continuous modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    /// Points per interval mode (and about as many per simplex mode) at which
    /// the inequalities are checked.
    pub samples: usize,
    /// Points per continuous mode used to build the envelope `Č`.
    pub envelope_samples: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { samples: 1001, envelope_samples: 33 }
    }
}

/// The binding inequality of a violated action.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CausalityViolation {
    /// Successor node playing the role of `z_r` (`None` for `C ≥ δ`).
    pub r: Option<usize>,
    /// Distribution over `successors` at which the inequality fails.
    pub xi: Vec<f64>,
    pub successors: Vec<usize>,
    /// Right-hand side minus left-hand side, positive.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionVerdict {
    pub node: usize,
    pub action: usize,
    pub violation: Option<CausalityViolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeCausality {
    pub node: usize,
    /// Largest admissible `δ` at this node; negative when not even MC.
    pub delta_star: f64,
    /// Whether continuous modes were only sampled.
    pub sampled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CausalityReport {
    pub criterion: Criterion,
    pub delta: f64,
    pub certified: bool,
    pub actions: Vec<ActionVerdict>,
    pub nodes: Vec<NodeCausality>,
    /// `Δ(X) = min_i δ⋆_i`.
    pub global_delta: f64,
}

impl CausalityReport {
    /// Violations sorted by node, worst gap first within a node.
    pub fn violations(&self) -> Vec<&ActionVerdict> {
        let mut v: Vec<&ActionVerdict> = self.actions.iter().filter(|a| a.violation.is_some()).collect();
        v.sort_by(|a, b| {
            a.node.cmp(&b.node).then(
                b.violation.as_ref().unwrap().gap.total_cmp(&a.violation.as_ref().unwrap().gap),
            )
        });
        v
    }
}

/// One inequality `lhs ≥ base + weight·δ`.
#[derive(Clone, Debug)]
struct Check {
    action: usize,
    r: Option<usize>,
    xi: Vec<f64>,
    lhs: f64,
    base: f64,
    weight: f64,
}

impl Check {
    fn gap(&self, delta: f64) -> f64 {
        self.base + self.weight * delta - self.lhs
    }

    fn bound(&self) -> f64 {
        (self.lhs - self.base) / self.weight
    }

    fn violated(&self, delta: f64) -> bool {
        self.gap(delta) > CAUSALITY_TOL * self.lhs.abs().max(1.0)
    }
}

struct NodeAnalysis {
    successors: Vec<usize>,
    checks: Vec<Check>,
    sampled: bool,
}

/// Evenly spaced barycentric points with `div` subdivisions per edge.
pub fn simplex_grid(m: usize, div: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, div: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if m == 1 {
            cur.push(left as f64 / div as f64);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k as f64 / div as f64);
            rec(m - 1, left - k, div, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, div, div, &mut Vec::new(), &mut out);
    out
}

/// Subdivisions giving at least `samples` points on an `(m-1)`-simplex.
fn divisions(m: usize, samples: usize) -> usize {
    let mut div = 1;
    while count(m, div) < samples {
        div += 1;
    }
    div
}

fn count(m: usize, div: usize) -> usize {
    // C(div + m - 1, m - 1)
    (1..m).fold(1usize, |acc, k| acc * (div + k) / k)
}

/// Samples of a node's action set as points over `successors`.
struct Sampled {
    action: usize,
    xi: Vec<f64>,
    cost: f64,
    finite: bool,
}

fn embed(successors: &[usize], support: &[usize], local: &[f64]) -> Vec<f64> {
    let mut xi = vec![0.0; successors.len()];
    for (&j, &w) in support.iter().zip(local) {
        xi[successors.binary_search(&j).unwrap()] += w;
    }
    xi
}

fn sample_action(action: &Action, a: usize, successors: &[usize], samples: usize, out: &mut Vec<Sampled>) {
    match action {
        Action::Finite(f) => {
            let support: Vec<usize> = f.transitions.iter().map(|t| t.0).collect();
            let local: Vec<f64> = f.transitions.iter().map(|t| t.1).collect();
            out.push(Sampled { action: a, xi: embed(successors, &support, &local), cost: f.cost, finite: true });
        }
        Action::Urgency(m) => {
            let ps: Vec<f64> = match &m.support {
                Support::Points(ps) => ps.clone(),
                Support::Interval => (0..samples).map(|k| k as f64 / (samples - 1) as f64).collect(),
            };
            for p in ps {
                let xi = embed(successors, &[m.stay, m.switch], &[1.0 - p, p]);
                out.push(Sampled { action: a, xi, cost: m.curve.eval(p), finite: false });
            }
        }
        Action::Simplex(s) => {
            let div = divisions(s.successors.len(), samples);
            for local in simplex_grid(s.successors.len(), div) {
                let xi = embed(successors, &s.successors, &local);
                out.push(Sampled { action: a, xi, cost: s.cost(&local), finite: false });
            }
        }
    }
}

/// Cost of a continuous mode at a distribution over `successors`, if the
/// distribution lies in the mode.
fn mode_cost_at(action: &Action, successors: &[usize], xi: &[f64]) -> Option<f64> {
    let inside = |support: &[usize]| {
        xi.iter().enumerate().all(|(k, &w)| w <= 1e-15 || support.contains(&successors[k]))
    };
    let at = |j: usize| xi[successors.binary_search(&j).unwrap()];
    match action {
        Action::Urgency(m) if m.support == Support::Interval && inside(&[m.stay, m.switch]) => {
            Some(m.curve.eval(at(m.switch)))
        }
        Action::Simplex(s) if inside(&s.successors) => {
            let local: Vec<f64> = s.successors.iter().map(|&j| at(j)).collect();
            Some(s.cost(&local))
        }
        _ => None,
    }
}

fn analyze(model: &OsspModel, node: usize, criterion: Criterion, opts: &CheckOptions) -> Result<NodeAnalysis, CausalityError> {
    let set = &model.actions[node];
    let mut successors: Vec<usize> = set.iter().flat_map(Action::successors).collect();
    successors.sort_unstable();
    successors.dedup();
    let m = successors.len();

    let mut envelope = Vec::new();
    let mut checked = Vec::new();
    for (a, action) in set.iter().enumerate() {
        sample_action(action, a, &successors, opts.envelope_samples, &mut envelope);
        sample_action(action, a, &successors, opts.samples, &mut checked);
    }
    let sampled = set.iter().any(|a| !matches!(a, Action::Finite(_)));

    // Cheapest deterministic way to reach each successor.
    let mut vertex = vec![f64::INFINITY; m];
    for s in &envelope {
        if let Some(k) = single(&s.xi) {
            vertex[k] = vertex[k].min(s.cost);
        }
    }

    // The improved criterion skips finite actions that are not extreme points.
    let mut skip = vec![false; checked.len()];
    if criterion == Criterion::Improved {
        let finite_idx: Vec<usize> = (0..checked.len()).filter(|&k| checked[k].finite).collect();
        let points: Vec<CostPoint> =
            finite_idx.iter().map(|&k| CostPoint::new(checked[k].xi.clone(), checked[k].cost)).collect();
        for (&k, u) in finite_idx.iter().zip(classify_points(&points)) {
            skip[k] = u != Usefulness::Useful && single(&checked[k].xi).is_none();
        }
    }

    let env_points: Vec<CostPoint> = envelope.iter().map(|s| CostPoint::new(s.xi.clone(), s.cost)).collect();
    let c_check = |gamma: &[f64]| -> f64 {
        if let Some(k) = single(gamma) {
            return vertex[k];
        }
        let mut best = convexified_cost(&env_points, gamma).map(|e| e.value).unwrap_or(f64::INFINITY);
        for action in set {
            if let Some(c) = mode_cost_at(action, &successors, gamma) {
                best = best.min(c);
            }
        }
        best
    };

    let mut checks = Vec::new();
    for (k, s) in checked.iter().enumerate() {
        if single(&s.xi).is_some() {
            checks.push(Check { action: s.action, r: None, xi: s.xi.clone(), lhs: s.cost, base: 0.0, weight: 1.0 });
            continue;
        }
        if skip[k] {
            continue;
        }
        for r in (0..m).filter(|&r| s.xi[r] > 0.0) {
            let base = match criterion {
                Criterion::Improved => {
                    let gamma = oblique_projection(&s.xi, r).expect("stochastic point");
                    (1.0 - s.xi[r]) * c_check(&gamma)
                }
                Criterion::Simplified => {
                    let mut sum = 0.0;
                    for j in (0..m).filter(|&j| j != r && s.xi[j] > 0.0) {
                        if vertex[j].is_infinite() {
                            return Err(CausalityError::MissingDeterministicAction { node, successor: successors[j] });
                        }
                        sum += s.xi[j] * vertex[j];
                    }
                    sum
                }
            };
            checks.push(Check { action: s.action, r: Some(successors[r]), xi: s.xi.clone(), lhs: s.cost, base, weight: s.xi[r] });
        }
    }

    // Endpoint limits of interval urgency modes.
    for (a, action) in set.iter().enumerate() {
        let Action::Urgency(mode) = action else { continue };
        if mode.support != Support::Interval {
            continue;
        }
        let (ks, kw) = (successors.binary_search(&mode.stay).unwrap(), successors.binary_search(&mode.switch).unwrap());
        let curve = &mode.curve;
        let close = |x: f64, y: f64| (x - y).abs() <= CAUSALITY_TOL * x.abs().max(1.0);
        if close(curve.eval(1.0), vertex[kw]) {
            let xi = embed(&successors, &[mode.stay, mode.switch], &[0.0, 1.0]);
            let lhs = curve.eval(1.0) - curve.derivative(1.0);
            checks.push(Check { action: a, r: Some(mode.stay), xi, lhs, base: 0.0, weight: 1.0 });
        }
        if close(curve.eval(0.0), vertex[ks]) {
            let xi = embed(&successors, &[mode.stay, mode.switch], &[1.0, 0.0]);
            let lhs = curve.eval(0.0) + curve.derivative(0.0);
            checks.push(Check { action: a, r: Some(mode.switch), xi, lhs, base: 0.0, weight: 1.0 });
        }
    }
    Ok(NodeAnalysis { successors, checks, sampled })
}

/// Index of the only nonzero coordinate, if there is exactly one.
fn single(xi: &[f64]) -> Option<usize> {
    let mut it = xi.iter().enumerate().filter(|(_, &w)| w > 1e-15);
    match (it.next(), it.next()) {
        (Some((k, _)), None) => Some(k),
        _ => None,
    }
}

fn run(model: &OsspModel, delta: f64, criterion: Criterion, opts: &CheckOptions) -> Result<CausalityReport, CausalityError> {
    let mut actions = Vec::new();
    let mut nodes = Vec::new();
    for i in 0..model.n {
        let an = analyze(model, i, criterion, opts)?;
        let mut worst: Vec<Option<&Check>> = vec![None; model.actions[i].len()];
        let mut delta_star = f64::INFINITY;
        for c in &an.checks {
            delta_star = delta_star.min(c.bound());
            if c.violated(delta) && worst[c.action].is_none_or(|w| c.gap(delta) > w.gap(delta)) {
                worst[c.action] = Some(c);
            }
        }
        for (a, w) in worst.into_iter().enumerate() {
            let violation = w.map(|c| CausalityViolation {
                r: c.r,
                xi: c.xi.clone(),
                successors: an.successors.clone(),
                gap: c.gap(delta),
            });
            actions.push(ActionVerdict { node: i, action: a, violation });
        }
        // Rounding can push a zero width slightly negative.
        if (-CAUSALITY_TOL..0.0).contains(&delta_star) {
            delta_star = 0.0;
        }
        nodes.push(NodeCausality { node: i, delta_star, sampled: an.sampled });
    }
    let certified = actions.iter().all(|a| a.violation.is_none());
    let global_delta = nodes.iter().map(|n| n.delta_star).fold(f64::INFINITY, f64::min);
    Ok(CausalityReport { criterion, delta, certified, actions, nodes, global_delta })
}

/// Checks `C ≥ (1-ξ_r) Č(γ_r) + ξ_r δ` for every useful stochastic point.
pub fn check_mc_improved(model: &OsspModel, delta: f64) -> CausalityReport {
    check_mc_improved_with(model, delta, &CheckOptions::default())
}

pub fn check_mc_improved_with(model: &OsspModel, delta: f64, opts: &CheckOptions) -> CausalityReport {
    run(model, delta, Criterion::Improved, opts).expect("improved criterion has no failure mode")
}

/// Checks `C ≥ Σ_{j≠r} ξ_j C_j + ξ_r δ` with `C_j` the cheapest deterministic
/// cost to `z_j`.
pub fn check_mc_simplified(model: &OsspModel, delta: f64) -> Result<CausalityReport, CausalityError> {
    check_mc_simplified_with(model, delta, &CheckOptions::default())
}

pub fn check_mc_simplified_with(model: &OsspModel, delta: f64, opts: &CheckOptions) -> Result<CausalityReport, CausalityError> {
    run(model, delta, Criterion::Simplified, opts)
}

/// `δ⋆ = min(δ₁, δ₂)` for a node whose actions all lead into two successors.
pub fn max_delta_m2(model: &OsspModel, node: usize) -> Result<f64, CausalityError> {
    let an = analyze(model, node, Criterion::Improved, &CheckOptions::default())?;
    if an.successors.len() != 2 {
        return Err(CausalityError::NotTwoSuccessors { node });
    }
    let delta_star = an.checks.iter().map(Check::bound).fold(f64::INFINITY, f64::min);
    if delta_star < -CAUSALITY_TOL {
        return Err(CausalityError::NotMonotoneCausal { node, delta_star });
    }
    Ok(delta_star.max(0.0))
}

/// Outcome of sampling the homogeneous-cost condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneousVerdict {
    /// `min (∂C/∂ξ_j - (d-1) C - δ)` over samples and `j` with `ξ_j > 0`.
    pub worst_margin: f64,
    pub holds: bool,
    /// For `m = 2`: `min (C(ξ) - max(C₁ξ₁ + δξ₂, δξ₁ + C₂ξ₂))`.
    pub vertex_bound_margin: Option<f64>,
    pub samples: usize,
}

/// Samples `∂C/∂ξ_j(ξ) - (d-1) C(ξ) > δ` over the simplex. Without an
/// analytic gradient, central differences with step `1e-6` are used.
pub fn check_homogeneous_mc(
    cost: &dyn Fn(&[f64]) -> f64,
    gradient: Option<&dyn Fn(&[f64]) -> Vec<f64>>,
    m: usize,
    degree: f64,
    delta: f64,
    samples: usize,
) -> HomogeneousVerdict {
    let grid = simplex_grid(m, divisions(m, samples));
    let numeric = |x: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|j| {
                let h = 1e-6;
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[j] += h;
                b[j] -= h;
                (cost(&a) - cost(&b)) / (2.0 * h)
            })
            .collect()
    };
    let mut worst = f64::INFINITY;
    for xi in &grid {
        let g = match gradient {
            Some(g) => g(xi),
            None => numeric(xi),
        };
        let c = cost(xi);
        for j in (0..m).filter(|&j| xi[j] > 0.0) {
            worst = worst.min(g[j] - (degree - 1.0) * c - delta);
        }
    }
    let vertex_bound_margin = (m == 2).then(|| {
        let (c1, c2) = (cost(&[1.0, 0.0]), cost(&[0.0, 1.0]));
        grid.iter()
            .map(|x| cost(x) - (c1 * x[0] + delta * x[1]).max(delta * x[0] + c2 * x[1]))
            .fold(f64::INFINITY, f64::min)
    });
    HomogeneousVerdict { worst_margin: worst, holds: worst > 0.0, vertex_bound_margin, samples: grid.len() }
}

/// A generated instance on which label setting provably fails.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub model: OsspModel,
    /// Node `x_i`.
    pub node: usize,
    /// Node indices of `z_1 … z_m` (the target may be one of them).
    pub successors: Vec<usize>,
    pub r: usize,
    /// Index of the action `a` at `x_i`.
    pub action: usize,
    pub b: f64,
    pub b_lower: f64,
    pub b_upper: f64,
    /// `U(z_j)` for each successor.
    pub successor_values: Vec<f64>,
    /// Exact `U(x_i)`, attained by `a`.
    pub value: f64,
    /// The value a label-setting solver assigns to `x_i`.
    pub label_setting_value: f64,
}

/// Builds an OSSP containing `a` (distribution `ξ`, cost `C_a`) and `ã`
/// (distribution `γ_r`, cost `C̃`) at `x_i = 0` on which Dijkstra (`δ = 0`) or
/// Dial with bucket width `δ` finalizes `x_i` before `z_r`.
///
/// Every `z_j` has one deterministic action to the target so that its value
/// can be prescribed. `B = U(z_r) - Σ γ_{r,j} U(z_j)` is chosen inside
/// `(B̲, B̄)` and additionally so that the tentative value from `ã` lands no
/// later than `z_r` in the acceptance order. When `B̄ ≤ 0` (only possible for
/// `δ > 0`) the early tentative value comes from `e_r` instead.
pub fn build_sharpness_counterexample(
    xi: &[f64],
    r: usize,
    c_a: f64,
    c_tilde: f64,
    delta: f64,
) -> Result<Counterexample, CausalityError> {
    let m = xi.len();
    let bad = |s: &str| Err(CausalityError::InvalidParameters(s.into()));
    if m < 2 || r >= m {
        return bad("need m ≥ 2 and r < m");
    }
    if xi.iter().any(|&x| !(x > 0.0)) || (xi.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return bad("ξ must be a positive distribution");
    }
    if !(c_a > 0.0 && c_tilde > 0.0 && delta >= 0.0 && delta.is_finite()) {
        return bad("costs must be positive and δ ≥ 0");
    }
    let xr = xi[r];
    let rhs = (1.0 - xr) * c_tilde + xr * delta;
    if c_a >= rhs {
        return Err(CausalityError::ConditionNotViolated { lhs: c_a, rhs });
    }
    let b_lower = (c_a - delta) / (1.0 - xr);
    let b_upper = (c_tilde - c_a) / xr;
    let spec_b = (b_lower + b_upper) / 2.0;
    let pick = |lo: f64, hi: f64| if spec_b >= lo && spec_b < hi { spec_b } else { 0.5 * (lo + hi) };

    // base = U(z_j) for j ≠ r, u_r = U(z_r), e_r cost (None: expensive).
    let (b, base, u_r, c_er) = if delta == 0.0 {
        let b = pick(b_lower.max(c_tilde), b_upper);
        let base = if m == 2 { 0.0 } else { c_a };
        (b, base, base + b, None)
    } else if b_upper > 0.0 {
        let b = pick(b_lower.max(c_tilde - delta).max(0.0), b_upper);
        let eta = 0.5 * (b / delta).min(1.0).min(1.0 - (c_tilde - b) / delta);
        let k = (b / delta).ceil() + 2.0;
        let u_r = (k + eta) * delta;
        (b, u_r - b, u_r, None)
    } else {
        let b = 0.5 * (b_lower + b_upper);
        let lower2 = (c_a - (1.0 - xr) * c_tilde) / xr;
        let eta = 0.5 * (-b / delta).min(1.0).min((delta - c_a - xr * b) / delta).min((delta - lower2 - b) / delta);
        let k = (-b / delta).ceil() + 2.0;
        let base = (k + eta) * delta;
        let lower = (c_a - (1.0 - xr) * b).max(lower2);
        let upper = (1.0 - eta) * delta - b;
        (b, base, base + b, Some(0.5 * (lower + upper)))
    };

    // Nodes: x_i = 0, then every successor that is not the target.
    let target_slot = (base == 0.0).then(|| (0..m).find(|&j| j != r).unwrap());
    let n = 1 + m - usize::from(target_slot.is_some());
    let mut next = 1;
    let successors: Vec<usize> = (0..m)
        .map(|j| {
            if Some(j) == target_slot {
                n
            } else {
                next += 1;
                next - 1
            }
        })
        .collect();
    let values: Vec<f64> = (0..m).map(|j| if j == r { u_r } else { base }).collect();

    let mut model = OsspModel::new(n);
    let action = model.add_finite(0, c_a, successors.iter().copied().zip(xi.iter().copied()).collect());
    let gamma = oblique_projection(xi, r).unwrap();
    let tilde: Vec<(usize, f64)> = (0..m).filter(|&j| j != r).map(|j| (successors[j], gamma[j])).collect();
    let tilde_is_deterministic = tilde.len() == 1;
    model.add_finite(0, c_tilde, tilde);
    let expensive = 10.0 * (c_a + c_tilde + u_r + base + c_er.unwrap_or(0.0));
    for j in 0..m {
        if j == r {
            model.add_deterministic(0, successors[j], c_er.unwrap_or(expensive));
        } else if !tilde_is_deterministic {
            model.add_deterministic(0, successors[j], expensive);
        }
    }
    for j in 0..m {
        if successors[j] != n {
            model.add_deterministic(successors[j], n, values[j]);
        }
    }
    let value = c_a + xi.iter().zip(&values).map(|(x, u)| x * u).sum::<f64>();
    let label_setting_value = match c_er {
        Some(c) => u_r + c,
        None => c_tilde + base,
    };
    Ok(Counterexample {
        model,
        node: 0,
        successors,
        r,
        action,
        b,
        b_lower,
        b_upper,
        successor_values: values,
        value,
        label_setting_value,
    })
}
