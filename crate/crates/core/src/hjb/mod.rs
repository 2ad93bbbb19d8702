//! Semi-Lagrangian discretization of anisotropic time-optimal control.
//!
//! A gridpoint moves towards a waypoint on a face of one of its stencil
//! simplexes, paying travel time `|x̃ - x| / f` plus the interpolated value at
//! the waypoint. Each simplex is a continuous mode of an OSSP, so the label
//! setting solvers apply whenever the stencil is (δ-)causal.

pub mod checks;
pub mod geometry;
pub mod grid;
pub mod profile;
pub mod solve;

pub use checks::CheckError;
pub use grid::{discretize, Grid, GridModel, Stencil, TargetSpec};
pub use profile::SpeedProfile;
pub use solve::{hjb_solve, HjbError, HjbMethod, HjbSolution};
