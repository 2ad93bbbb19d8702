//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use ossp::curve::CostCurve;
use ossp::model::{OsspModel, Support, UrgencyMode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random point in the open probability simplex.
pub fn distribution(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// How stochastic action costs relate to the deterministic ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Flavor {
    /// Costs chosen to satisfy the simplified criterion with `δ = 0`, and
    /// with a positive margin whenever `strict` is set.
    Causal { strict: bool },
    /// Arbitrary positive costs.
    Arbitrary,
}

/// Random OSSP on `n` nodes. Every node has a deterministic path to the
/// target along a random order, a few extra deterministic arcs (cycles are
/// allowed), stochastic finite actions over its deterministic successors,
/// and occasionally an urgency mode.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize, flavor: Flavor) -> OsspModel {
    let mut model = OsspModel::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for (k, &i) in order.iter().enumerate() {
        let mut succ = vec![if k == 0 { n } else { order[rng.gen_range(0..k)] }];
        for _ in 0..rng.gen_range(0..3) {
            let j = rng.gen_range(0..=n);
            if j != i && !succ.contains(&j) {
                succ.push(j);
            }
        }
        let costs: Vec<f64> = succ.iter().map(|_| rng.gen_range(1.0..3.0)).collect();
        for (&j, &c) in succ.iter().zip(&costs) {
            model.add_deterministic(i, j, c);
        }
        if succ.len() >= 2 {
            for _ in 0..rng.gen_range(0..3) {
                let m = rng.gen_range(2..=succ.len());
                let mut pick: Vec<usize> = (0..succ.len()).collect();
                pick.shuffle(rng);
                pick.truncate(m);
                pick.sort_unstable();
                let xi = distribution(rng, m);
                let mixture: f64 = pick.iter().zip(&xi).map(|(&s, x)| x * costs[s]).sum();
                let slack = pick.iter().zip(&xi).map(|(&s, x)| x * costs[s]).fold(f64::INFINITY, f64::min);
                let cost = match flavor {
                    Flavor::Causal { strict } => {
                        let lambda = if strict { rng.gen_range(0.0..0.9) } else { rng.gen_range(0.0..=1.0) };
                        mixture - lambda * slack
                    }
                    Flavor::Arbitrary => mixture * rng.gen_range(0.2..1.3),
                };
                model.add_finite(i, cost, pick.iter().zip(&xi).map(|(&s, &x)| (succ[s], x)).collect());
            }
        }
        if n >= 2 && rng.gen_bool(0.3) {
            let stay = succ[0];
            let switch = loop {
                let j = rng.gen_range(0..=n);
                if j != i && j != stay {
                    break j;
                }
            };
            model.push(i, random_mode(rng, stay, switch, flavor));
        }
    }
    model
}

/// Urgency mode with a quadratic or three-point tabulated cost.
pub fn random_mode(rng: &mut ChaCha8Rng, stay: usize, switch: usize, flavor: Flavor) -> UrgencyMode {
    let k0 = rng.gen_range(1.0..3.0);
    let strict = matches!(flavor, Flavor::Causal { strict: true });
    if rng.gen_bool(0.5) {
        let beta = match flavor {
            Flavor::Causal { .. } if strict => k0 * rng.gen_range(0.0..0.9),
            Flavor::Causal { .. } => k0 * rng.gen_range(0.0..=1.0),
            Flavor::Arbitrary => k0 * rng.gen_range(0.0..3.0),
        };
        UrgencyMode::new(stay, switch, CostCurve::quadratic(beta, k0, 0.0), Support::Interval)
    } else {
        let k1 = k0 + rng.gen_range(0.5..4.0);
        let p = rng.gen_range(0.1..0.9);
        let chord = k0 + p * (k1 - k0);
        let low = match flavor {
            Flavor::Causal { .. } => (p * k1).max(k0) + if strict { 0.1 * (chord - (p * k1).max(k0)) } else { 0.0 },
            Flavor::Arbitrary => k0,
        };
        let kp = rng.gen_range(low..=chord);
        UrgencyMode::tabulated(stay, switch, CostCurve::table(vec![(0.0, k0), (p, kp), (1.0, k1)]))
    }
}
