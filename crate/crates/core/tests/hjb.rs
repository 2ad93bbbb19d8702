mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{distribution, rng};
use ossp::hjb::checks::{check_parallelogram_2d, check_tangent_2d};
use ossp::hjb::geometry::SimplexGeometry;
use ossp::hjb::solve::{certify_mc, max_delta_grid};
use ossp::hjb::{discretize, hjb_solve, Grid, HjbError, HjbMethod, SpeedProfile, Stencil, TargetSpec};
use ossp::model::sup_diff;
use proptest::prelude::*;
use rand::Rng;

fn stencil_geometries(profile: &SpeedProfile, stencil: Stencil) -> Vec<SimplexGeometry<'_>> {
    stencil
        .simplexes()
        .into_iter()
        .map(|s| SimplexGeometry::new(s.iter().map(|d| [d[0] as f64, d[1] as f64, d[2] as f64]).collect(), profile))
        .collect()
}

fn ellipse(a: f64, b: f64, theta: f64) -> SpeedProfile {
    SpeedProfile::Elliptic { a, b, theta }
}

fn centre_problem(k: usize, profile: SpeedProfile) -> ossp::hjb::GridModel {
    let p = Arc::new(profile);
    discretize(&Grid::new_2d(k, k, 1.0 / (k - 1) as f64), Stencil::EightPoint, |_| p.clone(), &TargetSpec::Point([0.5, 0.5, 0.0]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn simplex_cost_is_midpoint_convex(seed in any::<u64>(), three_d: bool) {
        let mut g = rng(seed);
        let profile = if three_d {
            SpeedProfile::ellipsoid_about_z([g.gen_range(0.5..2.0), g.gen_range(0.5..2.0), g.gen_range(0.5..2.0)], g.gen_range(0.0..PI))
        } else {
            ellipse(g.gen_range(0.5..2.0), g.gen_range(0.5..2.0), g.gen_range(0.0..PI))
        };
        let stencil = if three_d { Stencil::SixPoint3d } else { Stencil::EightPoint };
        for geom in stencil_geometries(&profile, stencil) {
            let m = geom.m();
            for _ in 0..10 {
                let (x, y) = (distribution(&mut g, m), distribution(&mut g, m));
                let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                prop_assert!(geom.cost(&mid) <= 0.5 * (geom.cost(&x) + geom.cost(&y)) + 1e-10);
            }
        }
    }

    #[test]
    fn tangent_certificate_implies_parallelogram(seed in any::<u64>()) {
        let mut g = rng(seed);
        let b = g.gen_range(0.5..2.0);
        let profile = ellipse(b * g.gen_range(1.0..3.0), b, g.gen_range(0.0..PI));
        for geom in stencil_geometries(&profile, Stencil::EightPoint) {
            if check_tangent_2d(&geom).unwrap().satisfied {
                prop_assert!(check_parallelogram_2d(&geom, 256).unwrap().satisfied);
            }
        }
    }

    #[test]
    fn certified_grids_solve_exactly(seed in any::<u64>(), k in 5usize..=17) {
        let mut g = rng(seed);
        let b = g.gen_range(0.5..2.0);
        let gm = centre_problem(k, ellipse(b * g.gen_range(1.0..2.4), b, g.gen_range(0.0..PI)));
        prop_assume!(certify_mc(&gm).is_ok());
        let dj = hjb_solve(&gm, HjbMethod::Dijkstra, false).unwrap().values;
        let vi = hjb_solve(&gm, HjbMethod::Vi, false).unwrap().values;
        prop_assert!(sup_diff(&dj, &vi) <= 1e-9);
        let delta = max_delta_grid(&gm).unwrap();
        if delta > 0.0 {
            let dial = hjb_solve(&gm, HjbMethod::Dial(delta), false).unwrap().values;
            prop_assert!(sup_diff(&dj, &dial) <= 1e-9);
        }
    }
}

#[test]
fn isotropic_error_halves_with_the_grid() {
    let speed = 2.0;
    let mut errors = Vec::new();
    for k in [17, 33] {
        let gm = centre_problem(k, SpeedProfile::Isotropic { speed });
        let u = hjb_solve(&gm, HjbMethod::Dijkstra, false).unwrap().values;
        let err = (0..gm.grid.len())
            .map(|id| {
                let p = gm.grid.position(id);
                (u[id] - ((p[0] - 0.5).hypot(p[1] - 0.5)) / speed).abs()
            })
            .fold(0.0, f64::max);
        errors.push(err);
    }
    let ratio = errors[0] / errors[1];
    assert!((1.5..=3.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn axis_distances_are_exact() {
    let gm = centre_problem(9, SpeedProfile::Isotropic { speed: 1.0 });
    let u = hjb_solve(&gm, HjbMethod::Dijkstra, false).unwrap().values;
    let at = |i: usize, j: usize| u[gm.grid.index([i, j, 0])];
    assert!((at(8, 4) - 0.5).abs() < 1e-12);
    assert!((at(8, 8) - 0.5 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn steep_ellipse_is_refused() {
    let gm = centre_problem(9, ellipse(3.0, 1.0, PI / 8.0));
    assert!(certify_mc(&gm).is_err());
    assert!(matches!(hjb_solve(&gm, HjbMethod::Dijkstra, false), Err(HjbError::CausalityRefused(_))));
    assert!(hjb_solve(&gm, HjbMethod::Dijkstra, true).is_ok());
}
