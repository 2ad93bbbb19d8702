//! Lane-switch cost families.

use thiserror::Error;

use crate::curve::{escalating_table, is_discretely_convex, CostCurve, RbcCurve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RbcError {
    #[error("anchors must satisfy K0 < K_mid < K_L and 0 < p_mid < 1")]
    InvalidAnchors,
    #[error("middle point ({0}, {1}) lies outside the control triangle")]
    NoFit(f64, f64),
}

/// Three-point table of the tentative/forced lane change model: stay at
/// `g`, a tentative attempt succeeding with `p̃ = 1 - e^{-αD}`, and a forced
/// switch. With `α = 0` the tentative point coincides with `(0, g)` and is
/// dropped.
pub fn jones_cost(g: f64, alpha: f64, d: f64, g1: f64, g2: f64) -> CostCurve {
    let pt = 1.0 - (-alpha * d).exp();
    let mut points = vec![(0.0, g)];
    if pt > 0.0 {
        points.push((pt, g + pt * g1));
    }
    points.push((1.0, g + g1 + (1.0 - pt) * g2));
    CostCurve::table(points)
}

/// Escalating attempts: `K_ℓ = K_{ℓ-1} + (1 - p_{ℓ-1}) Y_ℓ`. Also reports
/// whether the knots are discretely convex (otherwise some levels are
/// useless).
pub fn escalating_cost(k0: f64, probs: &[f64], penalties: &[f64]) -> (CostCurve, bool) {
    let convex = is_discretely_convex(&escalating_table(k0, probs, penalties));
    let curve = CostCurve::Escalating { k0, probs: probs.to_vec(), penalties: penalties.to_vec() };
    (curve, convex)
}

fn bernstein(t: f64) -> (f64, f64, f64) {
    let s = 1.0 - t;
    (s * s, 2.0 * s * t, t * t)
}

/// Fits the rational Bézier curve through `(0, K₀)`, `mid` and `(1, K_L)`
/// with its middle control point at `((K₀-δ)/(K_L-δ), K₀)`.
///
/// The `K` equation gives `ω₁(t)` in closed form; `ω₁ > 0` exactly for
/// `t > t_lo`, and `p(t)` then runs from the chord crossing to the crossing
/// of the control segment `P₁P₂`, so the middle abscissa is found by
/// bisection on `(t_lo, 1)`.
pub fn rbc_fit(k0: f64, mid: (f64, f64), kl: f64, delta: f64) -> Result<RbcCurve, RbcError> {
    let (pm, km) = mid;
    if !(k0 < km && km < kl && pm > 0.0 && pm < 1.0 && delta < k0) {
        return Err(RbcError::InvalidAnchors);
    }
    let c = (k0 - delta) / (kl - delta);
    let s = (km - k0) / (kl - k0);
    let p_chord = s;
    let p_seg = c + (1.0 - c) * s;
    if !(pm >= p_chord - 1e-12 && pm < p_seg) {
        return Err(RbcError::NoFit(pm, km));
    }
    let weight = |t: f64| {
        let (b0, b1, b2) = bernstein(t);
        (b0 * (km - k0) + b2 * (km - kl)) / (b1 * (k0 - km))
    };
    let p_of = |t: f64| {
        let (b0, b1, b2) = bernstein(t);
        let w = weight(t);
        (b1 * w * c + b2) / (b0 + b1 * w + b2)
    };
    let t_lo = 1.0 / (1.0 + ((kl - km) / (km - k0)).sqrt());
    if pm <= p_chord + 1e-12 {
        // Collinear middle point: the curve degenerates to the chord.
        return Ok(RbcCurve { anchors: [(0.0, k0), mid, (1.0, kl)], delta, control_p: c, weight: 0.0, t_mid: t_lo });
    }
    let (mut lo, mut hi) = (t_lo, 1.0);
    while hi - lo > 1e-12 {
        let t = 0.5 * (lo + hi);
        if p_of(t) < pm {
            lo = t;
        } else {
            hi = t;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok(RbcCurve { anchors: [(0.0, k0), mid, (1.0, kl)], delta, control_p: c, weight: weight(t), t_mid: t })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jones_reference_values() {
        let k = jones_cost(4.0, 0.01, 10.0, 3.0, 40.0).knots().unwrap();
        let pt = 1.0 - (-0.1f64).exp();
        assert!((k[1].0 - 0.09516).abs() < 1e-5);
        assert!((k[1].1 - (4.0 + 3.0 * pt)).abs() < 1e-15);
        assert!((k[2].1 - 43.194).abs() < 1e-3);
    }

    #[test]
    fn jones_without_tentative_attempts() {
        let k = jones_cost(4.0, 0.0, 10.0, 3.0, 40.0).knots().unwrap();
        assert_eq!(k, vec![(0.0, 4.0), (1.0, 47.0)]);
    }

    #[test]
    fn escalating_single_level() {
        let (c, convex) = escalating_cost(2.0, &[1.0], &[5.0]);
        assert_eq!(c.knots().unwrap(), vec![(0.0, 2.0), (1.0, 7.0)]);
        assert!(convex);
    }

    #[test]
    fn collinear_middle_gives_chord() {
        let c = rbc_fit(1.0, (0.5, 2.0), 3.0, 0.0).unwrap();
        assert_eq!(c.weight, 0.0);
        for k in 1..10 {
            let p = k as f64 / 10.0;
            assert!((c.eval(p) - (1.0 + 2.0 * p)).abs() < 1e-9);
        }
    }

    #[test]
    fn outside_triangle_is_rejected() {
        assert!(matches!(rbc_fit(1.0, (0.9, 1.5), 3.0, 0.0), Err(RbcError::NoFit(..))));
        assert!(matches!(rbc_fit(1.0, (0.2, 2.0), 3.0, 0.0), Err(RbcError::NoFit(..))));
        assert_eq!(rbc_fit(1.0, (0.5, 0.5), 3.0, 0.0), Err(RbcError::InvalidAnchors));
    }

    #[test]
    fn fit_passes_through_middle() {
        let c = rbc_fit(10.0, (0.2, 12.0952), 44.0952, 0.0).unwrap();
        let (p, k) = c.point(c.t_mid);
        assert!((p - 0.2).abs() < 1e-9 && (k - 12.0952).abs() < 1e-9);
        assert!((c.eval(0.2) - 12.0952).abs() < 1e-9);
    }
}
