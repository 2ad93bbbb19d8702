mod common;

use common::{distribution, random_model, rng, Flavor};
use ossp::causality::{build_sharpness_counterexample, check_mc_improved, check_mc_simplified, CausalityError};
use ossp::labelset::{dial_solve, dijkstra_solve};
use ossp::model::{sup_diff, Action, OsspModel};
use ossp::pruning::prune;
use ossp::solve::value_iteration;
use proptest::prelude::*;
use rand::Rng;

fn vi(model: &OsspModel) -> Vec<f64> {
    value_iteration(model, 1e-13, 100_000).unwrap().values.values
}

fn flavor(k: u8) -> Flavor {
    match k {
        0 => Flavor::Causal { strict: true },
        1 => Flavor::Causal { strict: false },
        _ => Flavor::Arbitrary,
    }
}

/// Drops finite actions with more than two successors.
fn two_successor_only(mut model: OsspModel) -> OsspModel {
    for set in &mut model.actions {
        set.retain(|a| !matches!(a, Action::Finite(f) if f.transitions.len() > 2));
    }
    model
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certified_models_are_solved_exactly(seed in any::<u64>(), n in 1usize..=120, k in 0u8..3) {
        let mut g = rng(seed);
        let model = random_model(&mut g, n, flavor(k));
        let report = check_mc_improved(&model, 0.0);
        prop_assume!(report.certified);
        let exact = vi(&model);
        prop_assert!(sup_diff(&dijkstra_solve(&model).values.values, &exact) <= 1e-9);
        let delta = report.global_delta;
        if delta > 0.0 && delta.is_finite() && check_mc_improved(&model, delta).certified {
            prop_assert!(sup_diff(&dial_solve(&model, delta).unwrap().values.values, &exact) <= 1e-9);
        }
    }

    #[test]
    fn simplified_implies_improved(seed in any::<u64>(), n in 1usize..=60, k in 0u8..3, delta in 0.0f64..0.8) {
        let mut g = rng(seed);
        let model = random_model(&mut g, n, flavor(k));
        let simplified = check_mc_simplified(&model, delta).unwrap();
        if simplified.certified {
            prop_assert!(check_mc_improved(&model, delta).certified);
        }
    }

    #[test]
    fn criteria_agree_with_two_successors(seed in any::<u64>(), n in 1usize..=60, k in 0u8..3, delta in 0.0f64..0.8) {
        let mut g = rng(seed);
        // The improved criterion only checks useful actions; compare on the pruned model.
        let (model, _) = prune(&two_successor_only(random_model(&mut g, n, flavor(k)))).unwrap();
        let simplified = check_mc_simplified(&model, delta).unwrap();
        let improved = check_mc_improved(&model, delta);
        let verdicts = |r: &ossp::causality::CausalityReport| {
            r.actions.iter().map(|a| (a.node, a.action, a.violation.is_some())).collect::<Vec<_>>()
        };
        prop_assert_eq!(verdicts(&simplified), verdicts(&improved));
    }

    #[test]
    fn counterexamples_report_the_violation(seed in any::<u64>(), m in 2usize..=4, with_delta: bool) {
        let mut g = rng(seed);
        let xi = distribution(&mut g, m);
        let r = g.gen_range(0..m);
        let c_tilde = g.gen_range(1.0..5.0);
        let delta = if with_delta { g.gen_range(0.1..2.0) } else { 0.0 };
        let rhs = (1.0 - xi[r]) * c_tilde + xi[r] * delta;
        let ce = build_sharpness_counterexample(&xi, r, rhs * g.gen_range(0.2..0.95), c_tilde, delta).unwrap();
        let report = check_mc_improved(&ce.model, delta);
        let hit = report.actions.iter().find(|a| a.node == ce.node && a.action == ce.action).unwrap();
        let violation = hit.violation.as_ref().expect("seeded action is violated");
        prop_assert!(violation.r.is_some_and(|z| ce.successors.contains(&z)));
        prop_assert!(violation.gap > 0.0);
        let exact = vi(&ce.model);
        prop_assert!((exact[ce.node] - ce.value).abs() <= 1e-9);
        let ls = if with_delta { dial_solve(&ce.model, delta).unwrap() } else { dijkstra_solve(&ce.model) };
        prop_assert!((ls.values[ce.node] - ce.label_setting_value).abs() <= 1e-9);
        prop_assert!(ls.values[ce.node] - exact[ce.node] >= 1e-6);
    }
}

#[test]
fn satisfied_condition_is_refused() {
    let err = build_sharpness_counterexample(&[0.5, 0.5], 0, 2.0, 3.0, 0.0).unwrap_err();
    assert!(matches!(err, CausalityError::ConditionNotViolated { .. }));
}

#[test]
fn deterministic_widths_are_bounded_by_costs() {
    let mut m = OsspModel::new(2);
    m.add_deterministic(0, 1, 1.5);
    m.add_deterministic(1, 2, 1.0);
    let report = check_mc_improved(&m, 0.0);
    assert!(report.certified);
    assert_eq!(report.nodes[0].delta_star, 1.5);
    assert_eq!(report.global_delta, 1.0);
}

#[test]
fn two_point_width_matches_hand_computation() {
    // C = 2.8 for ξ = (1/2, 1/2) over deterministic costs 2 and 4:
    // C ≥ ξ₂C₂ + ξ₁δ gives δ ≤ 1.6 and C ≥ ξ₁C₁ + ξ₂δ gives δ ≤ 3.6.
    let mut m = OsspModel::new(2);
    m.add_deterministic(0, 1, 2.0);
    m.add_deterministic(0, 2, 4.0);
    m.add_finite(0, 2.8, vec![(1, 0.5), (2, 0.5)]);
    m.add_deterministic(1, 2, 5.0);
    let report = check_mc_simplified(&m, 0.0).unwrap();
    assert!((report.nodes[0].delta_star - 1.6).abs() < 1e-12);
    assert!((report.global_delta - 1.6).abs() < 1e-12);
    assert!(check_mc_improved(&m, 1.6).certified);
    assert!(!check_mc_improved(&m, 1.6 + 1e-6).certified);
}
