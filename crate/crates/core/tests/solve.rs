mod common;

use common::{random_model, rng, Flavor};
use ossp::model::{sup_diff, Action, OsspModel};
use ossp::pruning::remove_self_transitions;
use ossp::routing::{build_highway, HighwayConfig};
use ossp::solve::{bellman_update, gauss_seidel_solve, is_explicitly_causal, value_iteration};
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-10;

fn vi(model: &OsspModel) -> Vec<f64> {
    value_iteration(model, TOL, 100_000).unwrap().values.values
}

fn finite_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauss_seidel_agrees_with_value_iteration(seed in any::<u64>(), n in 1usize..60) {
        let mut g = rng(seed);
        let model = random_model(&mut g, n, Flavor::Arbitrary);
        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        let gs = gauss_seidel_solve(&model, &order, TOL, 100_000).unwrap().values.values;
        prop_assert!(finite_diff(&gs, &vi(&model)) <= 10.0 * TOL);
    }

    #[test]
    fn bellman_residual_within_tolerance(seed in any::<u64>(), n in 1usize..60) {
        let mut g = rng(seed);
        let model = random_model(&mut g, n, Flavor::Arbitrary);
        let u = vi(&model);
        for i in 0..n {
            let (t, _) = bellman_update(&model, i, &u);
            prop_assert!((t - u[i]).abs() <= TOL, "node {i}: U = {}, TU = {t}", u[i]);
        }
    }

    #[test]
    fn bellman_operator_is_monotone(seed in any::<u64>(), n in 1usize..40) {
        let mut g = rng(seed);
        let model = random_model(&mut g, n, Flavor::Arbitrary);
        let mut low: Vec<f64> = (0..n).map(|_| g.gen_range(0.0..20.0)).collect();
        low.push(0.0);
        let high: Vec<f64> = low
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == n { 0.0 } else if g.gen_bool(0.1) { f64::INFINITY } else { w + g.gen_range(0.0..5.0) })
            .collect();
        for i in 0..n {
            let (a, b) = (bellman_update(&model, i, &low).0, bellman_update(&model, i, &high).0);
            prop_assert!(a <= b + 1e-12, "node {i}: {a} > {b}");
        }
    }

    #[test]
    fn self_transition_removal_preserves_values(seed in any::<u64>(), n in 1usize..40) {
        let mut g = rng(seed);
        let mut model = random_model(&mut g, n, Flavor::Arbitrary);
        for i in 0..n {
            for a in model.actions[i].iter_mut() {
                let Action::Finite(f) = a else { continue };
                if g.gen_bool(0.3) {
                    let stay = g.gen_range(0.05..0.6);
                    for t in &mut f.transitions {
                        t.1 *= 1.0 - stay;
                    }
                    f.transitions.push((i, stay));
                }
            }
        }
        let rescaled = remove_self_transitions(&model).unwrap();
        let (a, b) = (vi(&model), vi(&rescaled));
        prop_assert!(sup_diff(&a, &b) <= 1e-9, "{a:?}\n{b:?}");
    }
}

#[test]
fn chain_converges_in_one_sweep_per_edge_order() {
    let mut m = OsspModel::new(3);
    m.add_deterministic(0, 1, 1.0);
    m.add_deterministic(1, 2, 1.0);
    m.add_deterministic(2, 3, 1.0);
    let s = value_iteration(&m, TOL, 10).unwrap();
    assert_eq!(s.values.values, vec![3.0, 2.0, 1.0, 0.0]);
    assert_eq!(s.iterations, 3);
    let gs = gauss_seidel_solve(&m, &[2, 1, 0], TOL, 10).unwrap();
    assert_eq!(gs.iterations, 1);
}

#[test]
fn highway_is_explicitly_causal() {
    let net = build_highway(&HighwayConfig::default()).unwrap();
    let order = is_explicitly_causal(&net.model).expect("highway has no cycles");
    let gs = gauss_seidel_solve(&net.model, &order, TOL, 10).unwrap();
    assert_eq!(gs.iterations, 1);
    assert!(sup_diff(&gs.values.values, &vi(&net.model)) <= 1e-9);
}

#[test]
fn cycle_is_not_explicitly_causal() {
    let mut m = OsspModel::new(2);
    m.add_deterministic(0, 1, 1.0);
    m.add_deterministic(1, 0, 1.0);
    m.add_deterministic(1, 2, 5.0);
    assert!(is_explicitly_causal(&m).is_none());
}
