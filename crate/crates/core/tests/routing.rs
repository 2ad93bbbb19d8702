use ossp::causality::{check_mc_improved, check_mc_simplified};
use ossp::curve::CostCurve;
use ossp::labelset::dijkstra_solve;
use ossp::model::{sup_diff, Action, OsspModel, Support, UrgencyMode};
use ossp::routing::{
    build_highway, build_roundabout, compare_stp_sp, escalating_cost, jones_cost, rbc_fit, EndTopology, HighwayConfig,
    LaneNetwork, LsmFamily, RoundaboutConfig, RoundaboutError,
};
use ossp::solve::value_iteration;
use ossp::validate::validate_model;
use ossp::Choice;
use proptest::prelude::*;

fn tentative() -> f64 {
    1.0 - (-0.1f64).exp()
}

/// Escalating knots of the reference highway for stay cost `g`.
fn reference_knots(g: f64) -> [(f64, f64); 4] {
    let pt = tentative();
    let k1 = g + pt * 3.0;
    let k2 = k1 + (1.0 - pt) * 2.0;
    let k3 = k2 + (1.0 - 0.2) * 40.0;
    [(0.0, g), (pt, k1), (0.2, k2), (1.0, k3)]
}

/// Single-mode model: node 0 stays to the target or switches to node 1.
fn single_mode(curve: CostCurve, support: Support) -> OsspModel {
    let mut m = OsspModel::new(2);
    m.push(0, UrgencyMode::new(2, 1, curve, support));
    m.add_deterministic(1, 2, 100.0);
    m
}

fn assert_lane_structure(net: &LaneNetwork) {
    let report = validate_model(&net.model);
    assert!(report.is_valid(), "{:?}", report.hard().next());
    for (i, set) in net.model.actions.iter().enumerate() {
        for a in set {
            let Action::Urgency(m) = a else { continue };
            let from = &net.nodes[i];
            if let Some(stay) = net.nodes.get(m.stay).filter(|v| v.segment == from.segment) {
                assert_eq!(stay.lane, from.lane, "mode at {i} does not stay in lane");
            }
        }
    }
}

#[test]
fn reference_highway_is_valid() {
    let net = build_highway(&HighwayConfig::default()).unwrap();
    assert_lane_structure(&net);
    assert_eq!(net.model.n, 3 * 152 - 2);
    for (i, set) in net.model.actions.iter().enumerate() {
        for a in set {
            if let Action::Urgency(m) = a {
                if let Some(stay) = net.nodes.get(m.stay) {
                    assert_eq!(stay.pos, net.nodes[i].pos + 1);
                }
            }
        }
    }
}

#[test]
fn every_lsm_family_builds() {
    let families = [
        LsmFamily::example(),
        LsmFamily::Jones { g2: 40.0 },
        LsmFamily::Quadratic { beta: 5.0, gamma: None },
        LsmFamily::Rbc { levels: vec![(0.2, 2.0), (1.0, 40.0)], delta: 0.0 },
    ];
    for lsm in families {
        for end in [EndTopology::VirtualForced, EndTopology::VirtualColumn] {
            let net = build_highway(&HighwayConfig { lsm: lsm.clone(), end, ..Default::default() }).unwrap();
            assert_lane_structure(&net);
            for c in &compare_stp_sp(&net).per_node {
                assert!(c.stp <= c.sp + 1e-9, "{lsm:?}: node {} STP {} > SP {}", c.node, c.stp, c.sp);
            }
        }
    }
}

#[test]
fn roundabout_is_valid() {
    let net = build_roundabout(&RoundaboutConfig::default()).unwrap();
    assert_lane_structure(&net);
    let report = check_mc_simplified(&net.model, 0.0).unwrap();
    assert!(report.certified);
    let exact = value_iteration(&net.model, 1e-13, 100_000).unwrap().values.values;
    assert!(sup_diff(&dijkstra_solve(&net.model).values.values, &exact) <= 1e-9);
}

#[test]
fn steep_roundabout_approach_is_refused() {
    let mut cfg = RoundaboutConfig::default();
    cfg.approach.beta = cfg.approach.gamma + cfg.entry_surcharge + 1.0;
    assert!(matches!(build_roundabout(&cfg), Err(RoundaboutError::CausalityRefused { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stochastic_plan_never_loses(lanes in 1usize..=4, eps in 0.0f64..0.3, mu in 0.0f64..60.0, length in 200.0f64..800.0) {
        let cfg = HighwayConfig { lanes, eps, mu, length, onramp: Some(length / 2.0), ..Default::default() };
        let net = build_highway(&cfg).unwrap();
        prop_assert!(validate_model(&net.model).is_valid());
        for c in &compare_stp_sp(&net).per_node {
            prop_assert!(c.stp <= c.sp + 1e-9);
        }
    }

    #[test]
    fn rbc_fit_invariants(k0 in 1.0f64..20.0, rise in 1.0f64..50.0, s in 0.05f64..0.95, bend in 0.01f64..0.99, delta_frac in 0.0f64..0.9) {
        let kl = k0 + rise;
        let delta = delta_frac * k0;
        // A middle point strictly between the chord and the control segment.
        let c = (k0 - delta) / (kl - delta);
        let km = k0 + s * rise;
        let p_chord = s;
        let p_seg = c + (1.0 - c) * s;
        let pm = p_chord + bend * (p_seg - p_chord);
        let curve = rbc_fit(k0, (pm, km), kl, delta).unwrap();
        prop_assert!((curve.eval(0.0) - k0).abs() <= 1e-9);
        prop_assert!((curve.eval(pm) - km).abs() <= 1e-9 * km);
        prop_assert!((curve.eval(1.0) - kl).abs() <= 1e-9);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=1000 {
            let p = k as f64 / 1000.0;
            let v = curve.eval(p);
            prop_assert!(v >= prev - 1e-9);
            prop_assert!(v >= p * kl + (1.0 - p) * delta - 1e-9 * kl);
            prev = v;
        }
    }
}

#[test]
fn reference_knots_match_closed_form() {
    let (_, convex) = escalating_cost(10.0, &[tentative(), 0.2, 1.0], &[tentative() * 3.0, 2.0, 40.0]);
    assert!(convex);
    let net = build_highway(&HighwayConfig::default()).unwrap();
    let ks = net
        .model
        .actions
        .iter()
        .flatten()
        .find_map(|a| match a {
            Action::Urgency(m) => m.curve.knots(),
            _ => None,
        })
        .unwrap();
    let expect = reference_knots(10.0);
    for (k, e) in ks.iter().zip(expect) {
        assert!((k.0 - e.0).abs() < 1e-15 && (k.1 - e.1).abs() < 1e-12);
    }
    let rounded: Vec<f64> = expect.iter().map(|k| (k.1 * 1e4).round() / 1e4).collect();
    assert_eq!(rounded, vec![10.0, 10.2855, 12.0952, 44.0952]);
}

#[test]
fn two_level_escalation_is_the_jones_model() {
    let (g, g1, g2) = (11.0, 3.0, 40.0);
    let pt = tentative();
    let (esc, _) = escalating_cost(g, &[pt, 1.0], &[pt * g1, g1 + g2]);
    let jones = jones_cost(g, 0.01, 10.0, g1, g2);
    let (a, b) = (esc.knots().unwrap(), jones.knots().unwrap());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x.0 - y.0).abs() < 1e-15 && (x.1 - y.1).abs() < 1e-12);
    }
}

#[test]
fn jones_mode_is_causal_iff_stay_cost_covers_forced_penalty() {
    // K(p̃) ≥ p̃ K(1) reduces to g ≥ p̃ g₂; the width is then g - p̃ g₂.
    let pt = tentative();
    for g in [10.0, 3.0] {
        let curve = jones_cost(g, 0.01, 10.0, 3.0, 40.0);
        let support = Support::Points(curve.knots().unwrap().iter().map(|k| k.0).collect());
        let report = check_mc_improved(&single_mode(curve, support), 0.0);
        assert_eq!(report.certified, g >= pt * 40.0);
        if report.certified {
            assert!((report.nodes[0].delta_star - (g - pt * 40.0)).abs() < 1e-9);
        }
    }
}

#[test]
fn reference_rbc_passes_through_its_anchors_with_zero_width() {
    let knots = reference_knots(10.0);
    let curve = rbc_fit(10.0, knots[2], knots[3].1, 0.0).unwrap();
    assert!((curve.eval(0.2) - knots[2].1).abs() < 1e-9);
    assert!((curve.control_p - 10.0 / knots[3].1).abs() < 1e-15);
    let report = check_mc_improved(&single_mode(CostCurve::Rbc(curve), Support::Interval), 0.0);
    assert!(report.certified);
    assert!(report.nodes[0].delta_star.abs() < 1e-6);
}

#[test]
fn reference_highway_golden_values() {
    let net = build_highway(&HighwayConfig::default()).unwrap();
    let report = check_mc_simplified(&net.model, 0.0).unwrap();
    assert!(report.certified);
    // The binding level is p = 0.2 in the unsurcharged right lane.
    let k = reference_knots(10.0);
    let expect = (k[2].1 - 0.2 * k[3].1) / 0.8;
    assert!((report.global_delta - expect).abs() < 1e-9);
    assert!((report.global_delta - 4.09516258).abs() < 1e-8);
    let cmp = compare_stp_sp(&net);
    assert!((cmp.median * 100.0 - 5.2057).abs() < 1e-3);
    assert!((cmp.mean * 100.0 - 5.4525).abs() < 1e-3);
    assert!((cmp.max * 100.0 - 15.6549).abs() < 1e-3);
}

#[test]
fn urgency_rises_toward_the_merge() {
    let cfg = HighwayConfig::default();
    let net = build_highway(&cfg).unwrap();
    let sol = dijkstra_solve(&net.model);
    let merge = (cfg.merge_x().unwrap() / cfg.d).round() as usize;
    let urgency: Vec<f64> = (0..merge)
        .map(|c| {
            let id = net.find("road", 0, c).or_else(|| net.find("onramp", 0, c)).unwrap();
            match &sol.policy.choices[id] {
                Some(Choice::Urgency { p, .. }) => *p,
                other => panic!("column {c}: {other:?}"),
            }
        })
        .collect();
    assert!(urgency.windows(2).all(|w| w[0] <= w[1]), "{urgency:?}");
    assert_eq!(urgency[0], 0.0);
    assert_eq!(urgency[merge - 1], 1.0);
}
