//! Multi-lane highway with an onramp slow-down zone.

use serde::{Deserialize, Serialize};

use super::costs::{escalating_cost, jones_cost, rbc_fit, RbcError};
use super::{LaneNetwork, LaneNode};
use crate::curve::{escalating_table, CostCurve};
use crate::model::{Action, FiniteAction, OsspModel, Support, UrgencyMode};

/// How the lane-switch cost `K(p)` is built from the stay cost `g(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LsmFamily {
    /// Escalating attempts. The tentative level `(p̃, p̃ g₁)` comes first
    /// (omitted when `α = 0`), followed by `levels` as `(p_ℓ, Y_ℓ)`.
    Escalating { levels: Vec<(f64, f64)> },
    /// Three-point tentative/forced table with forced-switch penalty `g₂`.
    Jones { g2: f64 },
    /// `K(p) = β p² + γ` over the whole interval, `γ = g(x)` unless given.
    Quadratic { beta: f64, gamma: Option<f64> },
    /// Rational Bézier curve through the first, second-to-last and last knots
    /// of the escalating table.
    Rbc { levels: Vec<(f64, f64)>, delta: f64 },
}

impl LsmFamily {
    /// The four urgency levels of the reference highway.
    pub fn example() -> Self {
        LsmFamily::Escalating { levels: vec![(0.2, 2.0), (1.0, 40.0)] }
    }
}

/// What happens to vehicles that reach the final column outside the target
/// lane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndTopology {
    /// They drive on into a virtual column past the exit. Final-column nodes
    /// keep only the mode toward the target lane, virtual nodes make forced
    /// switches toward it at `K(1)` (with `g` unchanged), and the target-lane
    /// virtual node is the exit itself.
    VirtualForced,
    /// Same, but virtual lane moves cost only the stay cost `g`.
    VirtualColumn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HighwayConfig {
    pub lanes: usize,
    /// Road length in meters; the exit sits at the end.
    pub length: f64,
    /// Cell length `D` in meters.
    pub d: f64,
    /// Per-lane penalty: `g = D (1 + i ε)` with lane 0 on the right.
    pub eps: f64,
    pub g1: f64,
    pub alpha: f64,
    pub lsm: LsmFamily,
    /// Distance of the onramp merge point from the exit, if any.
    pub onramp: Option<f64>,
    /// Surcharge on right-lane nodes within `D` of the merge point.
    pub mu: f64,
    /// Lane of the exit; defaults to the leftmost.
    pub target_lane: Option<usize>,
    pub end: EndTopology,
}

impl Default for HighwayConfig {
    fn default() -> Self {
        HighwayConfig {
            lanes: 3,
            length: 1500.0,
            d: 10.0,
            eps: 0.1,
            g1: 3.0,
            alpha: 0.01,
            lsm: LsmFamily::example(),
            onramp: Some(1000.0),
            mu: 35.0,
            target_lane: None,
            end: EndTopology::VirtualForced,
        }
    }
}

impl HighwayConfig {
    pub fn columns(&self) -> usize {
        (self.length / self.d).round() as usize
    }

    pub fn target_lane(&self) -> usize {
        self.target_lane.unwrap_or(self.lanes - 1)
    }

    /// Position of the merge point from the start of the road.
    pub fn merge_x(&self) -> Option<f64> {
        self.onramp.map(|r| self.length - r)
    }

    pub fn is_surcharged(&self, lane: usize, column: usize) -> bool {
        let x = column as f64 * self.d;
        lane == 0 && self.merge_x().is_some_and(|m| (x - m).abs() <= self.d * (1.0 + 1e-12))
    }

    /// Stay-in-lane cost `g(x)`.
    pub fn stay_cost(&self, lane: usize, column: usize) -> f64 {
        let g = self.d * (1.0 + lane as f64 * self.eps);
        if self.is_surcharged(lane, column) {
            g + self.mu
        } else {
            g
        }
    }

    fn tentative(&self) -> Option<f64> {
        let pt = 1.0 - (-self.alpha * self.d).exp();
        (pt > 0.0).then_some(pt)
    }

    fn escalating_levels(&self, levels: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut probs = Vec::new();
        let mut penalties = Vec::new();
        if let Some(pt) = self.tentative() {
            probs.push(pt);
            penalties.push(pt * self.g1);
        }
        for &(p, y) in levels {
            probs.push(p);
            penalties.push(y);
        }
        (probs, penalties)
    }

    /// `K(p)` and its support for a node with stay cost `g`.
    pub fn lsm_curve(&self, g: f64) -> Result<(CostCurve, Support), RbcError> {
        Ok(match &self.lsm {
            LsmFamily::Escalating { levels } => {
                let (probs, penalties) = self.escalating_levels(levels);
                let (curve, _) = escalating_cost(g, &probs, &penalties);
                let support = Support::Points(curve.knots().unwrap().iter().map(|k| k.0).collect());
                (curve, support)
            }
            LsmFamily::Jones { g2 } => {
                let curve = jones_cost(g, self.alpha, self.d, self.g1, *g2);
                let support = Support::Points(curve.knots().unwrap().iter().map(|k| k.0).collect());
                (curve, support)
            }
            LsmFamily::Quadratic { beta, gamma } => (CostCurve::quadratic(*beta, gamma.unwrap_or(g), 0.0), Support::Interval),
            LsmFamily::Rbc { levels, delta } => {
                let (probs, penalties) = self.escalating_levels(levels);
                let knots = escalating_table(g, &probs, &penalties);
                let last = knots[knots.len() - 1];
                let fit = rbc_fit(g, knots[knots.len() - 2], last.1, *delta)?;
                (CostCurve::Rbc(fit), Support::Interval)
            }
        })
    }
}

/// Lane-major node numbering over the columns `0..=C` plus the virtual
/// column `C + 1`; both exit cells map to the target.
struct Layout {
    lanes: usize,
    ids: Vec<usize>,
    n: usize,
}

impl Layout {
    fn new(lanes: usize, columns: usize, target_lane: usize) -> Self {
        let total = lanes * (columns + 2);
        let mut ids = vec![usize::MAX; total];
        let mut next = 0;
        for c in 0..columns + 2 {
            for i in 0..lanes {
                let exit = i == target_lane && c >= columns;
                if !exit {
                    ids[c * lanes + i] = next;
                    next += 1;
                }
            }
        }
        for c in columns..columns + 2 {
            ids[c * lanes + target_lane] = next;
        }
        Layout { lanes, ids, n: next }
    }

    fn id(&self, lane: usize, column: usize) -> usize {
        self.ids[column * self.lanes + lane]
    }
}

/// Builds the highway network. Every node drives forward at cost `g(x)` and
/// may attempt a switch to each adjacent lane, landing one column ahead.
pub fn build_highway(cfg: &HighwayConfig) -> Result<LaneNetwork, RbcError> {
    let columns = cfg.columns();
    let t = cfg.target_lane();
    let lay = Layout::new(cfg.lanes, columns, t);
    let mut model = OsspModel::new(lay.n);
    let mut nodes = vec![None; lay.n];
    let toward = |i: usize| if i < t { i + 1 } else { i - 1 };
    for c in 0..columns + 2 {
        for i in 0..cfg.lanes {
            if i == t && c >= columns {
                continue;
            }
            let id = lay.id(i, c);
            let g = cfg.stay_cost(i, c.min(columns));
            let segment = if c > columns {
                "virtual"
            } else if cfg.is_surcharged(i, c) {
                "onramp"
            } else {
                "road"
            };
            nodes[id] =
                Some(LaneNode { lane: i, pos: c, x: c as f64 * cfg.d, y: i as f64, segment: segment.into() });
            let (curve, support) = cfg.lsm_curve(g)?;
            if c > columns {
                let cost = match cfg.end {
                    EndTopology::VirtualColumn => g,
                    EndTopology::VirtualForced => curve.eval(1.0),
                };
                model.push(id, FiniteAction::deterministic(cost, lay.id(toward(i), c)));
                continue;
            }
            let ahead = c + 1;
            if c == columns {
                model.push(
                    id,
                    Action::Urgency(UrgencyMode::new(lay.id(i, ahead), lay.id(toward(i), ahead), curve, support)),
                );
                continue;
            }
            let mut switches = Vec::new();
            if i > 0 {
                switches.push(i - 1);
            }
            if i + 1 < cfg.lanes {
                switches.push(i + 1);
            }
            if switches.is_empty() {
                model.push(id, FiniteAction::deterministic(g, lay.id(i, ahead)));
            }
            for j in switches {
                let mode = UrgencyMode::new(lay.id(i, ahead), lay.id(j, ahead), curve.clone(), support.clone());
                model.push(id, Action::Urgency(mode));
            }
        }
    }
    Ok(LaneNetwork { model, nodes: nodes.into_iter().map(Option::unwrap).collect(), cell_length: cfg.d })
}
