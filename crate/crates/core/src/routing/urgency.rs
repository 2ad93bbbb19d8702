//! Choosing the urgency of a lane-change attempt.

use crate::curve::CostCurve;
use crate::model::Support;
use crate::optimize::minimize_on_unit;

/// Tolerance of the golden-section search on smooth non-quadratic curves.
pub const URGENCY_TOL: f64 = 1e-10;

/// `K(p) + (1-p) U_stay + p U_switch`, exact at the endpoints.
pub fn urgency_value(curve: &CostCurve, p: f64, u_stay: f64, u_switch: f64) -> f64 {
    if p == 0.0 {
        curve.eval(0.0) + u_stay
    } else if p == 1.0 {
        curve.eval(1.0) + u_switch
    } else {
        curve.eval(p) + (1.0 - p) * u_stay + p * u_switch
    }
}

/// Minimizes `K(p) + (1-p) U_stay + p U_switch` over the support. Ties go to
/// the smaller `p`. Returns `(p*, value)`.
pub fn minimize_urgency(curve: &CostCurve, support: &Support, u_stay: f64, u_switch: f64) -> (f64, f64) {
    let enumerate = |ps: &mut dyn Iterator<Item = f64>| {
        let mut best = (0.0, f64::INFINITY);
        for p in ps {
            let v = urgency_value(curve, p, u_stay, u_switch);
            if v < best.1 {
                best = (p, v);
            }
        }
        best
    };
    match support {
        Support::Points(ps) => enumerate(&mut ps.iter().copied()),
        Support::Interval => match curve {
            CostCurve::Quadratic { beta, .. } => {
                let gain = u_stay - u_switch;
                let p = if *beta > 0.0 {
                    (gain / (2.0 * beta)).clamp(0.0, 1.0)
                } else if gain > 0.0 {
                    1.0
                } else {
                    0.0
                };
                (p, urgency_value(curve, p, u_stay, u_switch))
            }
            CostCurve::Table { .. } | CostCurve::Escalating { .. } => {
                // Piecewise linear: a knot is always optimal.
                let knots = curve.knots().unwrap();
                enumerate(&mut knots.iter().map(|k| k.0))
            }
            CostCurve::Rbc(_) => minimize_on_unit(|p| urgency_value(curve, p, u_stay, u_switch), URGENCY_TOL),
        },
    }
}
