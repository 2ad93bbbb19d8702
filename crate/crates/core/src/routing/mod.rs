//! Lane-level route planning with stochastic lane-switch maneuvers.

pub mod compare;
pub mod costs;
pub mod highway;
pub mod roundabout;
pub mod urgency;

pub use compare::{compare_stp_sp, Comparison};
pub use costs::{escalating_cost, jones_cost, rbc_fit, RbcError};
pub use highway::{build_highway, EndTopology, HighwayConfig, LsmFamily};
pub use roundabout::{build_roundabout, entry_preference, Ring, RoundaboutConfig, RoundaboutError};
pub use urgency::minimize_urgency;

use crate::model::OsspModel;
use serde::Serialize;

/// Where a node sits on the road.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaneNode {
    pub lane: usize,
    /// Column along a road or index around a ring.
    pub pos: usize,
    /// Longitudinal position in meters (or a ring angle for roundabouts).
    pub x: f64,
    pub y: f64,
    pub segment: String,
}

/// A compiled road network: the OSSP plus node geometry.
#[derive(Clone, Debug)]
pub struct LaneNetwork {
    pub model: OsspModel,
    pub nodes: Vec<LaneNode>,
    pub cell_length: f64,
}

impl LaneNetwork {
    /// Model index of the node with this segment tag, lane and position.
    pub fn find(&self, segment: &str, lane: usize, pos: usize) -> Option<usize> {
        self.nodes.iter().position(|v| v.segment == segment && v.lane == lane && v.pos == pos)
    }
}
