//! Opportunistically stochastic shortest path (OSSP) toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the data model and [`solve`] the iterative reference solvers
//!   (value iteration and Gauss-Seidel) used as oracles everywhere else.
//! * [`pruning`] reduces action sets through the lower convex envelope of costs.
//! * [`causality`] certifies monotone (δ-)causality so that [`labelset`]
//!   solvers (Dijkstra, Dial) are known to be exact.
//! * [`hjb`] discretizes anisotropic time-optimal control on Cartesian grids.
//! * [`routing`] builds lane-level road networks with urgency-dependent
//!   lane-change costs.

pub mod causality;
pub mod curve;
pub mod hjb;
pub mod io;
pub mod labelset;
pub mod model;
pub mod optimize;
pub mod pruning;
pub mod routing;
pub mod solve;
pub mod validate;

pub use curve::{CostCurve, RbcCurve};
pub use model::{
    Action, Choice, FiniteAction, OsspModel, Policy, SimplexMode, Support, UrgencyMode,
    ValueFunction,
};
