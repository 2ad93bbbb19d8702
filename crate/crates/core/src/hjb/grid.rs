//! Cartesian grids, stencils and the discretized OSSP.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::geometry::{scale, Vec3};
use super::profile::SpeedProfile;
use crate::model::{Action, FiniteAction, OsspModel, SimplexMode};

/// Floor on boundary exit costs so that every cost stays positive.
pub const EXIT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// 2D, four quadrant simplexes.
    FourPoint,
    /// 2D, eight half-quadrant simplexes.
    EightPoint,
    /// 3D, eight orthant simplexes.
    SixPoint3d,
}

impl Stencil {
    pub fn dimension(self) -> usize {
        match self {
            Stencil::FourPoint | Stencil::EightPoint => 2,
            Stencil::SixPoint3d => 3,
        }
    }

    /// Simplexes as integer offsets in units of `h`.
    pub fn simplexes(self) -> Vec<Vec<[i64; 3]>> {
        match self {
            Stencil::FourPoint => {
                let d = [[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]];
                (0..4).map(|k| vec![d[k], d[(k + 1) % 4]]).collect()
            }
            Stencil::EightPoint => {
                let d = [[1, 0, 0], [1, 1, 0], [0, 1, 0], [-1, 1, 0], [-1, 0, 0], [-1, -1, 0], [0, -1, 0], [1, -1, 0]];
                (0..8).map(|k| vec![d[k], d[(k + 1) % 8]]).collect()
            }
            Stencil::SixPoint3d => {
                let mut out = Vec::new();
                for sx in [1, -1] {
                    for sy in [1, -1] {
                        for sz in [1, -1] {
                            out.push(vec![[sx, 0, 0], [0, sy, 0], [0, 0, sz]]);
                        }
                    }
                }
                out
            }
        }
    }
}

/// Uniform grid with nodes at `i·h` along each axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Node counts per axis; 2D grids have `dims[2] = 1`.
    pub dims: [usize; 3],
    pub h: f64,
}

impl Grid {
    pub fn new_2d(nx: usize, ny: usize, h: f64) -> Self {
        Grid { dims: [nx, ny, 1], h }
    }

    pub fn new_3d(nx: usize, ny: usize, nz: usize, h: f64) -> Self {
        Grid { dims: [nx, ny, nz], h }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    pub fn coords(&self, id: usize) -> [usize; 3] {
        let i = id % self.dims[0];
        let j = (id / self.dims[0]) % self.dims[1];
        let k = id / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    pub fn position(&self, id: usize) -> Vec3 {
        let c = self.coords(id);
        [c[0] as f64 * self.h, c[1] as f64 * self.h, c[2] as f64 * self.h]
    }

    /// Neighbor at an integer offset, if inside the grid.
    pub fn shift(&self, id: usize, d: [i64; 3]) -> Option<usize> {
        let c = self.coords(id);
        let mut out = [0usize; 3];
        for a in 0..3 {
            let v = c[a] as i64 + d[a];
            if v < 0 || v >= self.dims[a] as i64 {
                return None;
            }
            out[a] = v as usize;
        }
        Some(self.index(out))
    }

    pub fn is_boundary(&self, id: usize, dim: usize) -> bool {
        let c = self.coords(id);
        (0..dim).any(|a| c[a] == 0 || c[a] + 1 == self.dims[a])
    }

    /// Node closest to a point.
    pub fn nearest(&self, x: Vec3) -> usize {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let k = (x[a] / self.h).round().max(0.0) as usize;
            c[a] = k.min(self.dims[a] - 1);
        }
        self.index(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// The gridpoint nearest to this position is the target.
    Point(Vec3),
    /// Every boundary node exits to the target at cost `max(q, EXIT_FLOOR)`.
    Boundary { exit_cost: f64 },
}

/// The discretized problem with the grid/model index maps.
#[derive(Clone, Debug)]
pub struct GridModel {
    pub model: OsspModel,
    pub grid: Grid,
    pub stencil: Stencil,
    /// Model index of each gridpoint (`n` for a target gridpoint).
    pub node_of: Vec<usize>,
    /// Gridpoint of each model node.
    pub grid_of: Vec<usize>,
    pub target: TargetSpec,
}

impl GridModel {
    /// Model value of every gridpoint.
    pub fn grid_values(&self, values: &[f64]) -> Vec<f64> {
        self.node_of.iter().map(|&k| values[k]).collect()
    }
}

/// Builds the OSSP of the semi-Lagrangian scheme. Each stencil simplex lying
/// inside the grid becomes a simplex mode with cost `|Σ ξ_j z_j| / f`.
pub fn discretize(
    grid: &Grid,
    stencil: Stencil,
    profile: impl Fn(usize) -> Arc<SpeedProfile>,
    target: &TargetSpec,
) -> GridModel {
    let dim = stencil.dimension();
    let total = grid.len();
    let target_point = match target {
        TargetSpec::Point(x) => Some(grid.nearest(*x)),
        TargetSpec::Boundary { .. } => None,
    };
    let n = total - usize::from(target_point.is_some());
    let mut node_of = vec![n; total];
    let mut grid_of = Vec::with_capacity(n);
    for id in 0..total {
        if Some(id) != target_point {
            node_of[id] = grid_of.len();
            grid_of.push(id);
        }
    }
    let simplexes = stencil.simplexes();
    let mut actions = Vec::with_capacity(n);
    for &id in &grid_of {
        let mut set = Vec::new();
        match target {
            TargetSpec::Boundary { exit_cost } if grid.is_boundary(id, dim) => {
                set.push(Action::Finite(FiniteAction::deterministic(exit_cost.max(EXIT_FLOOR), n)));
            }
            _ => {
                let f = profile(id);
                for s in &simplexes {
                    let vertices: Option<Vec<usize>> = s.iter().map(|&d| grid.shift(id, d)).collect();
                    let Some(vertices) = vertices else { continue };
                    let offsets = s.iter().map(|d| scale([d[0] as f64, d[1] as f64, d[2] as f64], grid.h)).collect();
                    set.push(Action::Simplex(SimplexMode {
                        successors: vertices.iter().map(|&v| node_of[v]).collect(),
                        offsets,
                        profile: f.clone(),
                    }));
                }
            }
        }
        actions.push(set);
    }
    GridModel {
        model: OsspModel { n, actions, labels: None },
        grid: grid.clone(),
        stencil,
        node_of,
        grid_of,
        target: target.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso() -> Arc<SpeedProfile> {
        Arc::new(SpeedProfile::Isotropic { speed: 1.0 })
    }

    #[test]
    fn four_point_interior_has_quadrants() {
        let g = Grid::new_2d(3, 3, 1.0);
        let gm = discretize(&g, Stencil::FourPoint, |_| iso(), &TargetSpec::Point([0.0, 0.0, 0.0]));
        let center = gm.node_of[g.index([1, 1, 0])];
        assert_eq!(gm.model.actions[center].len(), 4);
        assert!(gm.model.actions[center].iter().all(|a| a.successors().len() == 2));
    }

    #[test]
    fn eight_point_interior_has_eight_modes() {
        let g = Grid::new_2d(3, 3, 1.0);
        let gm = discretize(&g, Stencil::EightPoint, |_| iso(), &TargetSpec::Point([0.0, 0.0, 0.0]));
        assert_eq!(gm.model.actions[gm.node_of[4]].len(), 8);
        // A corner keeps only the simplexes inside the grid.
        assert_eq!(gm.model.actions[gm.node_of[8]].len(), 2);
    }

    #[test]
    fn boundary_nodes_exit() {
        let g = Grid::new_2d(4, 4, 0.5);
        let gm = discretize(&g, Stencil::FourPoint, |_| iso(), &TargetSpec::Boundary { exit_cost: 0.0 });
        assert_eq!(gm.model.n, 16);
        assert_eq!(gm.model.actions[0], vec![Action::Finite(FiniteAction::deterministic(EXIT_FLOOR, 16))]);
    }
}
