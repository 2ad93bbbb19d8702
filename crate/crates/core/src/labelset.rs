//! Label-setting solvers: OSSP Dijkstra, OSSP Dial and the deterministic
//! shortest-path baseline.
//!
//! A node's tentative value is only ever updated through actions whose whole
//! support has been accepted. Urgency modes fall back to `p = 0` or `p = 1`
//! while one of their outcomes is still tentative, and simplex modes use the
//! face spanned by accepted vertices.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::model::{Choice, OsspModel, Policy, ValueFunction};
use crate::solve::evaluate_restricted;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabelError {
    #[error("bucket width must be positive and finite, got {0}")]
    InvalidDelta(f64),
}

/// Record of a label-setting run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveTrace {
    /// Accepted nodes in order, target first.
    pub acceptance: Vec<usize>,
    /// Values at acceptance, aligned with `acceptance`.
    pub accepted_values: Vec<f64>,
    /// Number of times each node was recomputed after a successor was accepted.
    pub updates: Vec<usize>,
    pub total_updates: usize,
}

#[derive(Clone, Debug)]
pub struct LabelSolution {
    pub values: ValueFunction,
    pub policy: Policy,
    pub trace: SolveTrace,
}

/// Heap entry ordered by `(value, node)` ascending.
#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shared state of both label-setting solvers.
struct State<'a> {
    model: &'a OsspModel,
    /// `preds[j]`: predecessor nodes of `j`, each with the actions involving `j`.
    preds: Vec<Vec<(usize, Vec<usize>)>>,
    values: Vec<f64>,
    accepted: Vec<bool>,
    choices: Vec<Option<Choice>>,
    trace: SolveTrace,
}

impl<'a> State<'a> {
    fn new(model: &'a OsspModel) -> Self {
        let n = model.n;
        let mut preds: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); n + 1];
        for (j, list) in model.predecessors().into_iter().enumerate() {
            for (i, a) in list {
                match preds[j].last_mut() {
                    Some((last, acts)) if *last == i => acts.push(a),
                    _ => preds[j].push((i, vec![a])),
                }
            }
        }
        State {
            model,
            preds,
            values: ValueFunction::infinite(n).values,
            accepted: vec![false; n + 1],
            choices: vec![None; n],
            trace: SolveTrace { updates: vec![0; n], ..Default::default() },
        }
    }

    fn accept(&mut self, j: usize) {
        self.accepted[j] = true;
        self.trace.acceptance.push(j);
        self.trace.accepted_values.push(self.values[j]);
    }

    /// Recomputes the tentative predecessors of a newly accepted `j`; calls
    /// `moved` for every node whose value decreased.
    fn relax(&mut self, j: usize, mut moved: impl FnMut(usize, f64)) {
        let preds = std::mem::take(&mut self.preds[j]);
        for (i, acts) in &preds {
            let i = *i;
            if self.accepted[i] {
                continue;
            }
            self.trace.updates[i] += 1;
            self.trace.total_updates += 1;
            let accepted = &self.accepted;
            for &a in acts {
                let action = &self.model.actions[i][a];
                if let Some((v, c)) = evaluate_restricted(action, a, &self.values, |k| accepted[k]) {
                    if v < self.values[i] {
                        self.values[i] = v;
                        self.choices[i] = Some(c);
                        moved(i, v);
                    }
                }
            }
        }
        self.preds[j] = preds;
    }

    fn finish(self) -> LabelSolution {
        LabelSolution {
            values: ValueFunction { values: self.values },
            policy: Policy { choices: self.choices },
            trace: self.trace,
        }
    }
}

/// OSSP Dijkstra with a binary heap keyed by `(value, node index)`.
pub fn dijkstra_solve(model: &OsspModel) -> LabelSolution {
    let mut st = State::new(model);
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, model.n));
    while let Some(Entry(v, j)) = heap.pop() {
        if st.accepted[j] || v != st.values[j] {
            continue;
        }
        st.accept(j);
        st.relax(j, |i, v| heap.push(Entry(v, i)));
    }
    st.finish()
}

/// OSSP Dial: bucket `k` holds tentative values in `[kδ, (k+1)δ)`. All nodes
/// of the lowest nonempty bucket are accepted together, then their
/// predecessors are updated in FIFO order. Values that fall into the current
/// (or an earlier) bucket are kept in the current one for the next round.
pub fn dial_solve(model: &OsspModel, delta: f64) -> Result<LabelSolution, LabelError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(LabelError::InvalidDelta(delta));
    }
    let mut st = State::new(model);
    let mut buckets: Vec<VecDeque<usize>> = vec![VecDeque::from([model.n])];
    let mut slot = vec![usize::MAX; model.n + 1];
    slot[model.n] = 0;
    let mut cur = 0;
    loop {
        while cur < buckets.len() && buckets[cur].iter().all(|&i| st.accepted[i] || slot[i] != cur) {
            buckets[cur].clear();
            cur += 1;
        }
        if cur == buckets.len() {
            break;
        }
        let round: Vec<usize> = buckets[cur].drain(..).collect();
        let mut batch = Vec::new();
        for i in round {
            if !st.accepted[i] && slot[i] == cur {
                st.accept(i);
                batch.push(i);
            }
        }
        for j in batch {
            st.relax(j, |i, v| {
                let b = ((v / delta).floor() as usize).max(cur);
                if b >= buckets.len() {
                    buckets.resize_with(b + 1, VecDeque::new);
                }
                slot[i] = b;
                buckets[b].push_back(i);
            });
        }
    }
    Ok(st.finish())
}

/// Classic Dijkstra on arcs `(from, to, cost)` towards node `target`.
/// Returns values and the next node on a shortest path.
pub fn deterministic_shortest_path(
    node_count: usize,
    arcs: &[(usize, usize, f64)],
    target: usize,
) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut into: Vec<Vec<(usize, f64)>> = vec![Vec::new(); node_count];
    for &(i, j, c) in arcs {
        into[j].push((i, c));
    }
    let mut values = vec![f64::INFINITY; node_count];
    let mut next = vec![None; node_count];
    let mut done = vec![false; node_count];
    values[target] = 0.0;
    let mut heap = BinaryHeap::from([Entry(0.0, target)]);
    while let Some(Entry(v, j)) = heap.pop() {
        if done[j] || v != values[j] {
            continue;
        }
        done[j] = true;
        for &(i, c) in &into[j] {
            let w = v + c;
            if !done[i] && w < values[i] {
                values[i] = w;
                next[i] = Some(j);
                heap.push(Entry(w, i));
            }
        }
    }
    (values, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> OsspModel {
        let mut m = OsspModel::new(3);
        m.add_deterministic(0, 1, 1.0);
        m.add_deterministic(1, 2, 1.0);
        m.add_deterministic(2, 3, 1.0);
        m
    }

    #[test]
    fn chain_acceptance_order() {
        let s = dijkstra_solve(&chain());
        assert_eq!(s.values.values, vec![3.0, 2.0, 1.0, 0.0]);
        assert_eq!(s.trace.acceptance, vec![3, 2, 1, 0]);
    }

    #[test]
    fn dial_single_node() {
        let mut m = OsspModel::new(1);
        m.add_deterministic(0, 1, 1.5);
        let s = dial_solve(&m, 1.0).unwrap();
        assert_eq!(s.values[0], 1.5);
        assert_eq!(s.trace.acceptance, vec![1, 0]);
        assert_eq!(dial_solve(&m, 0.0).unwrap_err(), LabelError::InvalidDelta(0.0));
    }

    #[test]
    fn two_node_stochastic() {
        let mut m = OsspModel::new(2);
        m.add_deterministic(0, 2, 3.0);
        m.add_finite(0, 1.0, vec![(2, 0.5), (1, 0.5)]);
        m.add_deterministic(0, 1, 5.0);
        m.add_deterministic(1, 2, 1.0);
        let s = dijkstra_solve(&m);
        assert_eq!(s.values.values, vec![1.5, 1.0, 0.0]);
        assert_eq!(s.policy.choices[0], Some(Choice::Finite { action: 1 }));
    }

    #[test]
    fn triangle_prefers_two_hops() {
        let (v, next) = deterministic_shortest_path(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)], 2);
        assert_eq!(v, vec![2.0, 1.0, 0.0]);
        assert_eq!(next[0], Some(1));
    }
}
