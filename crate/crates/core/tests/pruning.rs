mod common;

use common::{distribution, random_model, rng, Flavor};
use ossp::model::{sup_diff, Action, FiniteAction, OsspModel};
use ossp::pruning::{classify_points, convexified_cost, prune, CostPoint, RemovalReason, Usefulness};
use ossp::solve::value_iteration;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn vi(model: &OsspModel) -> Vec<f64> {
    value_iteration(model, 1e-13, 100_000).unwrap().values.values
}

/// The `m` vertices plus a few interior points, all with random costs.
fn random_points(g: &mut ChaCha8Rng, m: usize) -> Vec<CostPoint> {
    let mut points: Vec<CostPoint> = (0..m)
        .map(|j| {
            let mut xi = vec![0.0; m];
            xi[j] = 1.0;
            CostPoint::new(xi, g.gen_range(1.0..5.0))
        })
        .collect();
    for _ in 0..g.gen_range(0..6) {
        points.push(CostPoint::new(distribution(g, m), g.gen_range(0.5..5.0)));
    }
    points
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pruning_preserves_values(seed in any::<u64>(), n in 1usize..=50) {
        let mut g = rng(seed);
        let model = random_model(&mut g, n, Flavor::Arbitrary);
        let (pruned, report) = prune(&model).unwrap();
        prop_assert!(sup_diff(&vi(&model), &vi(&pruned)) <= 1e-9);
        prop_assert_eq!(report.actions_before - report.actions_after,
            report.removed.iter().filter(|r| r.p.is_none()).count());
    }

    #[test]
    fn envelope_is_midpoint_convex(seed in any::<u64>(), m in 2usize..=4) {
        let mut g = rng(seed);
        let points = random_points(&mut g, m);
        for _ in 0..20 {
            let (a, b) = (distribution(&mut g, m), distribution(&mut g, m));
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let ca = convexified_cost(&points, &a).unwrap().value;
            let cb = convexified_cost(&points, &b).unwrap().value;
            let cm = convexified_cost(&points, &mid).unwrap().value;
            prop_assert!(cm <= 0.5 * (ca + cb) + 1e-10, "{cm} > ({ca} + {cb}) / 2");
        }
    }

    #[test]
    fn envelope_lies_below_inputs(seed in any::<u64>(), m in 2usize..=4) {
        let mut g = rng(seed);
        let points = random_points(&mut g, m);
        let classes = classify_points(&points);
        for (p, class) in points.iter().zip(classes) {
            let env = convexified_cost(&points, &p.xi).unwrap().value;
            prop_assert!(env <= p.cost + 1e-10);
            let on_envelope = (env - p.cost).abs() <= 1e-9 * p.cost.max(1.0);
            prop_assert_eq!(on_envelope, class != Usefulness::Dominated);
        }
    }

    #[test]
    fn certificate_reconstructs_query(seed in any::<u64>(), m in 2usize..=4) {
        let mut g = rng(seed);
        let points = random_points(&mut g, m);
        let q = distribution(&mut g, m);
        let env = convexified_cost(&points, &q).unwrap();
        let weight: f64 = env.mixture.iter().map(|&(_, l)| l).sum();
        prop_assert!((weight - 1.0).abs() <= 1e-10);
        let cost: f64 = env.mixture.iter().map(|&(k, l)| l * points[k].cost).sum();
        prop_assert!((cost - env.value).abs() <= 1e-10);
        for j in 0..m {
            let x: f64 = env.mixture.iter().map(|&(k, l)| l * points[k].xi[j]).sum();
            prop_assert!((x - q[j]).abs() <= 1e-10);
        }
    }
}

#[test]
fn seeded_dominated_action_is_removed() {
    let mut m = OsspModel::new(2);
    m.add_deterministic(0, 1, 1.0);
    m.add_deterministic(0, 2, 3.0);
    m.add_finite(0, 2.5, vec![(1, 0.5), (2, 0.5)]);
    m.add_finite(0, 1.5, vec![(1, 0.5), (2, 0.5)]);
    m.add_deterministic(1, 2, 1.0);
    let (pruned, report) = prune(&m).unwrap();
    assert_eq!(report.actions_before, 5);
    assert_eq!(report.actions_after, 4);
    assert_eq!(report.removed[0].action, 2);
    assert_eq!(report.removed[0].reason, RemovalReason::Duplicate);
    assert!(matches!(&pruned.actions[0][2], Action::Finite(f) if f.cost == 1.5));
}

#[test]
fn midpoint_mixture_is_replaceable() {
    let mut m = OsspModel::new(2);
    m.add_deterministic(0, 1, 1.0);
    m.add_deterministic(0, 2, 3.0);
    m.push(0, FiniteAction::new(2.0, vec![(1, 0.5), (2, 0.5)]));
    m.add_finite(0, 2.5, vec![(1, 0.25), (2, 0.75)]);
    m.add_deterministic(1, 2, 1.0);
    let (_, report) = prune(&m).unwrap();
    let reasons: Vec<_> = report.removed.iter().map(|r| (r.action, r.reason)).collect();
    assert_eq!(reasons, vec![(2, RemovalReason::Replaceable), (3, RemovalReason::Replaceable)]);
}
