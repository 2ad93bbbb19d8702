//! Action-set reduction through the lower convex envelope of costs.
//!
//! Pure actions at a node are points `(ξ, C)` where `ξ` is the distribution
//! over the node's ordered successor list. An action whose point lies on or
//! above the envelope spanned by the other actions can be dropped without
//! changing the value function.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::model::{Action, FiniteAction, OsspModel, Support};

/// Collinearity tolerance separating useful from replaceable points.
pub const EXTREME_TOL: f64 = 1e-9;
const ZERO: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PruneError {
    #[error("node {node}, action {action} has a self-loop with probability 1")]
    DegenerateSelfLoop { node: usize, action: usize },
    #[error("query point is outside the convex hull of the action points")]
    OutsideHull,
    #[error("cannot project away a coordinate equal to 1")]
    DegenerateProjection,
}

/// A pure action embedded in the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostPoint {
    pub xi: Vec<f64>,
    pub cost: f64,
}

impl CostPoint {
    pub fn new(xi: Vec<f64>, cost: f64) -> Self {
        CostPoint { xi, cost }
    }
}

/// Value of the convexified cost together with a certifying mixture.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeResult {
    pub value: f64,
    /// `(point index, λ)` pairs with positive weight.
    pub mixture: Vec<(usize, f64)>,
    /// Whether the query is an input point that is an extreme point of the
    /// epigraph.
    pub extreme_point: bool,
}

/// Replaces `p_ii > 0` by rescaling: `C̃ = C / (1 - p_ii)`.
pub fn remove_self_transitions(model: &OsspModel) -> Result<OsspModel, PruneError> {
    let mut out = model.clone();
    for (i, set) in out.actions.iter_mut().enumerate() {
        for (a, action) in set.iter_mut().enumerate() {
            let Action::Finite(f) = action else { continue };
            let Some(k) = f.transitions.iter().position(|t| t.0 == i) else { continue };
            let p_ii = f.transitions[k].1;
            if p_ii >= 1.0 - ZERO {
                return Err(PruneError::DegenerateSelfLoop { node: i, action: a });
            }
            f.transitions.remove(k);
            let scale = 1.0 / (1.0 - p_ii);
            f.cost *= scale;
            for t in &mut f.transitions {
                t.1 *= scale;
            }
        }
    }
    Ok(out)
}

/// The finite actions of a node embedded over its sorted successor list.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub successors: Vec<usize>,
    pub points: Vec<CostPoint>,
    /// Action index behind each point.
    pub actions: Vec<usize>,
    /// Transition-equivalent duplicates that were dropped.
    pub duplicates: Vec<usize>,
}

/// Embeds the finite actions of `node`, keeping the cheapest of each group of
/// transition-equivalent actions (lowest index on ties).
pub fn embed_actions(model: &OsspModel, node: usize) -> Embedding {
    let finite: Vec<(usize, &FiniteAction)> = model.actions[node]
        .iter()
        .enumerate()
        .filter_map(|(a, act)| match act {
            Action::Finite(f) => Some((a, f)),
            _ => None,
        })
        .collect();
    let mut successors: Vec<usize> = finite.iter().flat_map(|(_, f)| f.transitions.iter().map(|t| t.0)).collect();
    successors.sort_unstable();
    successors.dedup();
    let mut emb = Embedding { successors, points: Vec::new(), actions: Vec::new(), duplicates: Vec::new() };
    for (a, f) in finite {
        let mut xi = vec![0.0; emb.successors.len()];
        for &(j, p) in &f.transitions {
            xi[emb.successors.binary_search(&j).unwrap()] += p;
        }
        let same = emb.points.iter().position(|q| q.xi.iter().zip(&xi).all(|(x, y)| (x - y).abs() <= ZERO));
        match same {
            Some(k) if f.cost < emb.points[k].cost => {
                emb.duplicates.push(emb.actions[k]);
                emb.points[k].cost = f.cost;
                emb.actions[k] = a;
            }
            Some(_) => emb.duplicates.push(a),
            None => {
                emb.points.push(CostPoint::new(xi, f.cost));
                emb.actions.push(a);
            }
        }
    }
    emb.duplicates.sort_unstable();
    emb
}

/// Lower convex envelope `Č(ξ)` of the lifted points at `query`.
///
/// Only points whose support lies in the support of `query` can take part in
/// a mixture, so the problem is reduced to that face first: one vertex is a
/// minimum, an edge uses a monotone-chain hull, larger faces enumerate
/// simplex bases.
pub fn convexified_cost(points: &[CostPoint], query: &[f64]) -> Result<EnvelopeResult, PruneError> {
    let face: Vec<usize> = (0..query.len()).filter(|&j| query[j] > ZERO).collect();
    let cand: Vec<usize> = (0..points.len())
        .filter(|&r| points[r].xi.iter().enumerate().all(|(j, &x)| x <= ZERO || face.contains(&j)))
        .collect();
    if cand.is_empty() || face.is_empty() {
        return Err(PruneError::OutsideHull);
    }
    let (value, mixture) = match face.len() {
        1 => {
            let best = cand.iter().copied().fold(cand[0], |b, r| if points[r].cost < points[b].cost { r } else { b });
            (points[best].cost, vec![(best, 1.0)])
        }
        2 => edge_envelope(points, &cand, face[1], query[face[1]] / (query[face[0]] + query[face[1]]))?,
        _ => basis_envelope(points, &cand, &face, query)?,
    };
    let extreme_point = match mixture.as_slice() {
        [(r, _)] if same_xi(&points[*r].xi, query) => {
            let others: Vec<CostPoint> =
                points.iter().enumerate().filter(|(k, _)| k != r).map(|(_, p)| p.clone()).collect();
            classify_against(&others, &points[*r]) == Usefulness::Useful
        }
        _ => false,
    };
    Ok(EnvelopeResult { value, mixture, extreme_point })
}

fn same_xi(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= ZERO)
}

/// 1D envelope on an edge, parametrized by the weight `t` of coordinate `j`.
fn edge_envelope(points: &[CostPoint], cand: &[usize], j: usize, t: f64) -> Result<(f64, Vec<(usize, f64)>), PruneError> {
    let mut pts: Vec<(f64, f64, usize)> = cand.iter().map(|&r| (points[r].xi[j], points[r].cost, r)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    pts.dedup_by(|b, a| (a.0 - b.0).abs() <= ZERO);
    let mut hull: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b unless it lies strictly below the chord a-p.
            if (b.1 - a.1) * (p.0 - a.0) >= (p.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    if t < hull[0].0 - ZERO || t > hull[hull.len() - 1].0 + ZERO {
        return Err(PruneError::OutsideHull);
    }
    if let Some(v) = hull.iter().find(|v| (v.0 - t).abs() <= ZERO) {
        return Ok((v.1, vec![(v.2, 1.0)]));
    }
    let k = hull.windows(2).position(|w| t < w[1].0).unwrap();
    let (a, b) = (hull[k], hull[k + 1]);
    let s = (t - a.0) / (b.0 - a.0);
    Ok(((1.0 - s) * a.1 + s * b.1, vec![(a.2, 1.0 - s), (b.2, s)]))
}

/// Minimizes `Σ λ_r C_r` subject to `Σ λ_r ξ_r = ξ`, `λ ≥ 0` by enumerating
/// all square bases; the optimum of this small LP sits at one of them.
fn basis_envelope(
    points: &[CostPoint],
    cand: &[usize],
    face: &[usize],
    query: &[f64],
) -> Result<(f64, Vec<(usize, f64)>), PruneError> {
    let k = face.len();
    let rhs = DVector::from_iterator(k, face.iter().map(|&j| query[j]));
    let mut best: Option<(f64, Vec<(usize, f64)>)> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    if cand.len() < k {
        return Err(PruneError::OutsideHull);
    }
    loop {
        let cols: Vec<usize> = idx.iter().map(|&c| cand[c]).collect();
        let m = DMatrix::from_fn(k, k, |row, col| points[cols[col]].xi[face[row]]);
        if let Some(lambda) = m.lu().solve(&rhs) {
            if lambda.iter().all(|&l| l >= -1e-12 && l.is_finite()) {
                let cost: f64 = cols.iter().zip(lambda.iter()).map(|(&r, &l)| l.max(0.0) * points[r].cost).sum();
                if best.as_ref().is_none_or(|b| cost < b.0) {
                    let mix = cols.iter().zip(lambda.iter()).filter(|(_, &l)| l > ZERO).map(|(&r, &l)| (r, l)).collect();
                    best = Some((cost, mix));
                }
            }
        }
        // Next k-combination of candidate positions.
        let mut i = k;
        loop {
            if i == 0 {
                return best.ok_or(PruneError::OutsideHull);
            }
            i -= 1;
            if idx[i] < cand.len() - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Usefulness {
    /// Strictly below the envelope of the other points (an extreme point).
    Useful,
    /// Strictly above the envelope of the other points.
    Dominated,
    /// On the envelope but a mixture of the other points.
    Replaceable,
}

fn classify_against(others: &[CostPoint], p: &CostPoint) -> Usefulness {
    match convexified_cost(others, &p.xi) {
        Err(_) => Usefulness::Useful,
        Ok(env) => {
            let tol = EXTREME_TOL * p.cost.abs().max(1.0);
            if p.cost < env.value - tol {
                Usefulness::Useful
            } else if p.cost > env.value + tol {
                Usefulness::Dominated
            } else {
                Usefulness::Replaceable
            }
        }
    }
}

/// Classification of each point against the envelope of the others.
pub fn classify_points(points: &[CostPoint]) -> Vec<Usefulness> {
    (0..points.len())
        .map(|r| {
            let others: Vec<CostPoint> =
                points.iter().enumerate().filter(|&(k, _)| k != r).map(|(_, p)| p.clone()).collect();
            classify_against(&others, &points[r])
        })
        .collect()
}

/// Indices of the points that are extreme points of the epigraph of `Č`.
pub fn useful_actions(points: &[CostPoint]) -> Vec<usize> {
    classify_points(points)
        .into_iter()
        .enumerate()
        .filter(|(_, u)| *u == Usefulness::Useful)
        .map(|(r, _)| r)
        .collect()
}

/// `γ_r = ξ / (1 - ξ_r)` with the `r`-th coordinate zeroed.
pub fn oblique_projection(xi: &[f64], r: usize) -> Result<Vec<f64>, PruneError> {
    let rest = 1.0 - xi[r];
    if rest <= ZERO {
        return Err(PruneError::DegenerateProjection);
    }
    Ok(xi.iter().enumerate().map(|(j, &x)| if j == r { 0.0 } else { x / rest }).collect())
}

/// A maximal successor support and the actions associated with it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mode {
    pub successors: Vec<usize>,
    pub actions: Vec<usize>,
}

/// Imperfect modes of a node, sorted lexicographically by successor list.
pub fn extract_modes(model: &OsspModel, node: usize) -> Vec<Mode> {
    let supports: Vec<Vec<usize>> = model.actions[node]
        .iter()
        .map(|a| {
            let mut s = a.successors();
            s.sort_unstable();
            s
        })
        .collect();
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.binary_search(x).is_ok());
    let mut modes: Vec<Vec<usize>> = supports
        .iter()
        .filter(|s| !supports.iter().any(|t| t.len() > s.len() && subset(s, t)))
        .cloned()
        .collect();
    modes.sort();
    modes.dedup();
    modes
        .into_iter()
        .map(|s| {
            let actions = (0..supports.len()).filter(|&a| subset(&supports[a], &s)).collect();
            Mode { successors: s, actions }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    Duplicate,
    Dominated,
    Replaceable,
}

/// An action (or one urgency value of a tabulated mode) removed by [`prune`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Removal {
    pub node: usize,
    /// Action index in the input model.
    pub action: usize,
    /// Urgency value for removed support points of a mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub reason: RemovalReason,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PruneReport {
    pub removed: Vec<Removal>,
    pub actions_before: usize,
    pub actions_after: usize,
}

/// Removes self-transitions, duplicate, dominated and replaceable finite
/// actions, and non-useful support points of tabulated urgency modes.
pub fn prune(model: &OsspModel) -> Result<(OsspModel, PruneReport), PruneError> {
    let base = remove_self_transitions(model)?;
    let mut out = OsspModel { n: base.n, actions: Vec::with_capacity(base.n), labels: base.labels.clone() };
    let mut report = PruneReport { actions_before: model.action_count(), ..Default::default() };
    for i in 0..base.n {
        let emb = embed_actions(&base, i);
        let mut drop: Vec<(usize, RemovalReason)> =
            emb.duplicates.iter().map(|&a| (a, RemovalReason::Duplicate)).collect();
        for (k, u) in classify_points(&emb.points).into_iter().enumerate() {
            match u {
                Usefulness::Useful => {}
                Usefulness::Dominated => drop.push((emb.actions[k], RemovalReason::Dominated)),
                Usefulness::Replaceable => drop.push((emb.actions[k], RemovalReason::Replaceable)),
            }
        }
        drop.sort_by_key(|d| d.0);
        let mut kept = Vec::new();
        for (a, action) in base.actions[i].iter().enumerate() {
            if let Some(&(_, reason)) = drop.iter().find(|d| d.0 == a) {
                report.removed.push(Removal { node: i, action: a, p: None, reason });
                continue;
            }
            let mut action = action.clone();
            if let Action::Urgency(m) = &mut action {
                if let Support::Points(ps) = &m.support {
                    let points: Vec<CostPoint> =
                        ps.iter().map(|&p| CostPoint::new(vec![1.0 - p, p], m.curve.eval(p))).collect();
                    let classes = classify_points(&points);
                    let mut keep = Vec::new();
                    for (&p, u) in ps.iter().zip(classes) {
                        match u {
                            Usefulness::Useful => keep.push(p),
                            Usefulness::Dominated => {
                                report.removed.push(Removal { node: i, action: a, p: Some(p), reason: RemovalReason::Dominated })
                            }
                            Usefulness::Replaceable => report.removed.push(Removal {
                                node: i,
                                action: a,
                                p: Some(p),
                                reason: RemovalReason::Replaceable,
                            }),
                        }
                    }
                    m.support = Support::Points(keep);
                }
            }
            kept.push(action);
        }
        out.actions.push(kept);
    }
    report.actions_after = out.action_count();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(p: f64, c: f64) -> CostPoint {
        CostPoint::new(vec![1.0 - p, p], c)
    }

    #[test]
    fn self_loop_rescaled() {
        let mut m = OsspModel::new(1);
        m.add_finite(0, 1.0, vec![(0, 0.5), (1, 0.5)]);
        let r = remove_self_transitions(&m).unwrap();
        assert_eq!(r.actions[0][0], Action::Finite(FiniteAction::new(2.0, vec![(1, 1.0)])));
    }

    #[test]
    fn full_self_loop_rejected() {
        let mut m = OsspModel::new(1);
        m.add_finite(0, 1.0, vec![(0, 1.0)]);
        assert_eq!(remove_self_transitions(&m), Err(PruneError::DegenerateSelfLoop { node: 0, action: 0 }));
    }

    #[test]
    fn duplicate_keeps_cheapest() {
        let mut m = OsspModel::new(2);
        m.add_deterministic(0, 1, 3.0);
        m.add_deterministic(0, 1, 2.0);
        let e = embed_actions(&m, 0);
        assert_eq!(e.points, vec![CostPoint::new(vec![1.0], 2.0)]);
        assert_eq!(e.actions, vec![1]);
        assert_eq!(e.duplicates, vec![0]);
    }

    #[test]
    fn envelope_on_edge() {
        let pts = [p1(0.0, 1.0), p1(0.5, 5.0), p1(1.0, 2.0)];
        let env = convexified_cost(&pts, &[0.5, 0.5]).unwrap();
        assert_eq!(env.value, 1.5);
        assert_eq!(env.mixture, vec![(0, 0.5), (2, 0.5)]);
        assert_eq!(classify_points(&pts)[1], Usefulness::Dominated);
    }

    #[test]
    fn collinear_middle_is_replaceable() {
        let pts = [p1(0.0, 1.0), p1(0.5, 1.5), p1(1.0, 2.0)];
        assert_eq!(classify_points(&pts), vec![Usefulness::Useful, Usefulness::Replaceable, Usefulness::Useful]);
        assert_eq!(useful_actions(&pts), vec![0, 2]);
    }

    #[test]
    fn outside_hull_reported() {
        let pts = [p1(0.0, 1.0), p1(0.5, 1.5)];
        assert_eq!(convexified_cost(&pts, &[0.0, 1.0]), Err(PruneError::OutsideHull));
    }

    #[test]
    fn projections() {
        assert_eq!(oblique_projection(&[0.5, 0.5], 0).unwrap(), vec![0.0, 1.0]);
        let g = oblique_projection(&[0.2, 0.3, 0.5], 2).unwrap();
        assert!((g[0] - 0.4).abs() < 1e-15 && (g[1] - 0.6).abs() < 1e-15 && g[2] == 0.0);
        assert_eq!(oblique_projection(&[1.0, 0.0], 0), Err(PruneError::DegenerateProjection));
    }

    #[test]
    fn basis_enumeration_in_triangle() {
        let e = |j: usize, c: f64| {
            let mut xi = vec![0.0; 3];
            xi[j] = 1.0;
            CostPoint::new(xi, c)
        };
        let pts = [e(0, 1.0), e(1, 2.0), e(2, 3.0), CostPoint::new(vec![1.0 / 3.0; 3], 5.0)];
        let env = convexified_cost(&pts, &[1.0 / 3.0; 3]).unwrap();
        assert!((env.value - 2.0).abs() < 1e-12);
        assert_eq!(env.mixture.len(), 3);
    }
}
