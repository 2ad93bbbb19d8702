//! Certified solves of the discretized problem.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::checks::{
    check_3d, check_parallelogram_2d, isotropic_delta_simplex, max_delta_simplex_2d, CheckError, DEFAULT_SAMPLES_2D,
    DEFAULT_SAMPLES_3D,
};
use super::geometry::{combine, norm, scale, SimplexGeometry, Vec3};
use super::grid::GridModel;
use super::profile::SpeedProfile;
use crate::labelset::{dial_solve, dijkstra_solve, LabelError};
use crate::model::{Action, Choice, Policy};
use crate::solve::{value_iteration, SolveError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HjbMethod {
    Dijkstra,
    Dial(f64),
    Vi,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HjbError {
    #[error("causality not certified: {0}")]
    CausalityRefused(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

#[derive(Clone, Debug)]
pub struct HjbSolution {
    /// Value at every gridpoint.
    pub values: Vec<f64>,
    /// Unit direction of motion at every gridpoint (`None` at the target and
    /// at exits).
    pub directions: Vec<Option<Vec3>>,
    pub policy: Policy,
}

/// Distinct simplexes of the model, keyed by profile and offsets.
fn distinct_simplexes(gm: &GridModel) -> Vec<(Arc<SpeedProfile>, Vec<Vec3>)> {
    let mut seen: HashMap<(usize, Vec<[u64; 3]>), ()> = HashMap::new();
    let mut out = Vec::new();
    for set in &gm.model.actions {
        for a in set {
            if let Action::Simplex(s) = a {
                let key = (
                    Arc::as_ptr(&s.profile) as usize,
                    s.offsets.iter().map(|z| [z[0].to_bits(), z[1].to_bits(), z[2].to_bits()]).collect(),
                );
                if seen.insert(key, ()).is_none() {
                    out.push((s.profile.clone(), s.offsets.clone()));
                }
            }
        }
    }
    out
}

/// Checks every stencil simplex: the parallelogram test in 2D, the oblique
/// projection test in 3D. Returns the first failure.
pub fn certify_mc(gm: &GridModel) -> Result<(), String> {
    for (profile, offsets) in distinct_simplexes(gm) {
        let geom = SimplexGeometry::new(offsets.clone(), &profile);
        let ok = match offsets.len() {
            2 => check_parallelogram_2d(&geom, DEFAULT_SAMPLES_2D).map(|v| v.satisfied),
            3 => check_3d(&geom, DEFAULT_SAMPLES_3D).map(|v| v.satisfied),
            _ => Ok(true),
        };
        match ok {
            Ok(true) => {}
            Ok(false) => return Err(format!("simplex {offsets:?} is not monotone causal")),
            Err(e) => return Err(format!("simplex {offsets:?}: {e}")),
        }
    }
    Ok(())
}

/// `Δ(X)`: the smallest per-simplex admissible bucket width. 2D simplexes
/// use the normal-vector formula, 3D ones need an isotropic profile.
pub fn max_delta_grid(gm: &GridModel) -> Result<f64, CheckError> {
    let mut best = f64::INFINITY;
    for (profile, offsets) in distinct_simplexes(gm) {
        let d = match (offsets.len(), profile.isotropic_speed()) {
            (2, _) => max_delta_simplex_2d(&SimplexGeometry::new(offsets, &profile))?,
            (_, Some(f)) => isotropic_delta_simplex(&offsets, f),
            _ => return Err(CheckError::NormalUnavailable),
        };
        best = best.min(d);
    }
    Ok(best)
}

/// Solves the grid model. Label-setting methods are refused unless the
/// stencil is certified (MC for Dijkstra, `δ ≤ Δ(X)` for Dial) or `force`.
pub fn hjb_solve(gm: &GridModel, method: HjbMethod, force: bool) -> Result<HjbSolution, HjbError> {
    let (values, policy) = match method {
        HjbMethod::Vi => {
            let s = value_iteration(&gm.model, 1e-13, 10 * gm.model.n.max(1))?;
            (s.values.values, s.policy)
        }
        HjbMethod::Dijkstra => {
            if !force {
                certify_mc(gm).map_err(HjbError::CausalityRefused)?;
            }
            let s = dijkstra_solve(&gm.model);
            (s.values.values, s.policy)
        }
        HjbMethod::Dial(delta) => {
            if !force {
                certify_mc(gm).map_err(HjbError::CausalityRefused)?;
                let limit = max_delta_grid(gm).map_err(|e| HjbError::CausalityRefused(e.to_string()))?;
                if delta > limit * (1.0 + 1e-12) {
                    return Err(HjbError::CausalityRefused(format!("δ = {delta} exceeds Δ(X) = {limit}")));
                }
            }
            let s = dial_solve(&gm.model, delta)?;
            (s.values.values, s.policy)
        }
    };
    let mut directions = vec![None; gm.grid.len()];
    for (node, choice) in policy.choices.iter().enumerate() {
        if let Some(Choice::Simplex { action, xi }) = choice {
            if let Action::Simplex(s) = &gm.model.actions[node][*action] {
                let d = combine(&s.offsets, xi);
                directions[gm.grid_of[node]] = Some(scale(d, 1.0 / norm(d)));
            }
        }
    }
    Ok(HjbSolution { values: gm.grid_values(&values), directions, policy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hjb::grid::{discretize, Grid, Stencil, TargetSpec};

    #[test]
    fn boundary_distance_is_exact_on_axis_lines() {
        let g = Grid::new_2d(9, 9, 0.125);
        let iso = Arc::new(SpeedProfile::Isotropic { speed: 1.0 });
        let gm = discretize(&g, Stencil::EightPoint, |_| iso.clone(), &TargetSpec::Boundary { exit_cost: 0.0 });
        let s = hjb_solve(&gm, HjbMethod::Dijkstra, false).unwrap();
        let center = g.index([4, 4, 0]);
        assert!((s.values[center] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn four_point_dial_refused() {
        let g = Grid::new_2d(5, 5, 0.25);
        let iso = Arc::new(SpeedProfile::Isotropic { speed: 1.0 });
        let gm = discretize(&g, Stencil::FourPoint, |_| iso.clone(), &TargetSpec::Point([0.5, 0.5, 0.0]));
        assert!(matches!(hjb_solve(&gm, HjbMethod::Dial(0.1), false), Err(HjbError::CausalityRefused(_))));
    }
}
