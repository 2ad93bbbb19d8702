//! Lane-change cost curves `K(p)` over the urgency `p ∈ [0, 1]`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostCurve {
    /// Knots `(p, K)`, interpolated linearly between them.
    Table { points: Vec<(f64, f64)> },
    /// `K_ℓ = K_{ℓ-1} + (1 - p_{ℓ-1}) Y_ℓ` with `p_0 = 0`.
    Escalating { k0: f64, probs: Vec<f64>, penalties: Vec<f64> },
    /// `K(p) = β p² + γ + offset`.
    Quadratic { beta: f64, gamma: f64, offset: f64 },
    /// Quadratic rational Bézier curve.
    Rbc(RbcCurve),
}

impl CostCurve {
    pub fn table(points: Vec<(f64, f64)>) -> Self {
        CostCurve::Table { points }
    }

    pub fn quadratic(beta: f64, gamma: f64, offset: f64) -> Self {
        CostCurve::Quadratic { beta, gamma, offset }
    }

    /// Knot table for the piecewise-linear kinds.
    pub fn knots(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            CostCurve::Table { points } => Some(points.clone()),
            CostCurve::Escalating { k0, probs, penalties } => Some(escalating_table(*k0, probs, penalties)),
            _ => None,
        }
    }

    pub fn eval(&self, p: f64) -> f64 {
        match self {
            CostCurve::Quadratic { beta, gamma, offset } => beta * p * p + gamma + offset,
            CostCurve::Rbc(c) => c.eval(p),
            _ => interpolate(&self.knots().unwrap(), p),
        }
    }

    /// `K'(p)`. Piecewise-linear kinds return the slope of the segment
    /// containing `p` (the right segment at `p = 0`, the left one elsewhere).
    pub fn derivative(&self, p: f64) -> f64 {
        match self {
            CostCurve::Quadratic { beta, .. } => 2.0 * beta * p,
            CostCurve::Rbc(c) => c.derivative(p),
            _ => {
                let knots = self.knots().unwrap();
                let seg = knots.windows(2).position(|w| p <= w[1].0).unwrap_or(knots.len() - 2);
                let (a, b) = (knots[seg], knots[seg + 1]);
                (b.1 - a.1) / (b.0 - a.0)
            }
        }
    }

    /// Whether the curve is smooth enough for derivative-based endpoint limits.
    pub fn is_smooth(&self) -> bool {
        matches!(self, CostCurve::Quadratic { .. } | CostCurve::Rbc(_))
    }
}

/// Unrolls the escalating recursion into a knot table.
pub fn escalating_table(k0: f64, probs: &[f64], penalties: &[f64]) -> Vec<(f64, f64)> {
    let mut table = vec![(0.0, k0)];
    let mut prev_p = 0.0;
    let mut k = k0;
    for (&p, &y) in probs.iter().zip(penalties) {
        k += (1.0 - prev_p) * y;
        table.push((p, k));
        prev_p = p;
    }
    table
}

/// Divided differences `(K_ℓ - K_{ℓ-1}) / (p_ℓ - p_{ℓ-1})` non-decreasing.
pub fn is_discretely_convex(points: &[(f64, f64)]) -> bool {
    let slopes: Vec<f64> = points.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    slopes.windows(2).all(|s| s[1] >= s[0] - 1e-12 * s[0].abs().max(1.0))
}

fn interpolate(points: &[(f64, f64)], p: f64) -> f64 {
    if p <= points[0].0 {
        return points[0].1;
    }
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if p == b.0 {
            return b.1;
        }
        if p < b.0 {
            let s = (p - a.0) / (b.0 - a.0);
            return a.1 + s * (b.1 - a.1);
        }
    }
    points[points.len() - 1].1
}

/// Quadratic rational Bézier curve through `(0, K₀)` and `(1, K_L)` with the
/// middle control point at `((K₀ - δ)/(K_L - δ), K₀)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbcCurve {
    /// `(0, K₀)`, the fitted middle datapoint, `(1, K_L)`.
    pub anchors: [(f64, f64); 3],
    pub delta: f64,
    /// Abscissa of the middle control point.
    pub control_p: f64,
    /// Middle weight `ω₁`; the outer weights are 1.
    pub weight: f64,
    /// Curve parameter at which the middle anchor is attained.
    pub t_mid: f64,
}

impl RbcCurve {
    pub fn k0(&self) -> f64 {
        self.anchors[0].1
    }

    pub fn kl(&self) -> f64 {
        self.anchors[2].1
    }

    /// Curve point `(p(t), K(t))`.
    pub fn point(&self, t: f64) -> (f64, f64) {
        let (b0, b1, b2) = bernstein(t);
        let w = self.weight;
        let den = b0 + b1 * w + b2;
        let p = (b1 * w * self.control_p + b2) / den;
        let k = (b0 * self.k0() + b1 * w * self.k0() + b2 * self.kl()) / den;
        (p, k)
    }

    /// Inverts `p(t)`, which is increasing on `[0, 1]`.
    pub fn parameter_at(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.point(mid).0 < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn eval(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.k0();
        }
        if p >= 1.0 {
            return self.kl();
        }
        self.point(self.parameter_at(p)).1
    }

    /// `dK/dp = K'(t) / p'(t)`.
    pub fn derivative(&self, p: f64) -> f64 {
        let t = self.parameter_at(p.clamp(0.0, 1.0));
        let (b0, b1, b2) = bernstein(t);
        let (d0, d1, d2) = (-2.0 * (1.0 - t), 2.0 - 4.0 * t, 2.0 * t);
        let w = self.weight;
        let den = b0 + b1 * w + b2;
        let dden = d0 + d1 * w + d2;
        let np = b1 * w * self.control_p + b2;
        let dnp = d1 * w * self.control_p + d2;
        let nk = b0 * self.k0() + b1 * w * self.k0() + b2 * self.kl();
        let dnk = d0 * self.k0() + d1 * w * self.k0() + d2 * self.kl();
        let dp = (dnp * den - np * dden) / (den * den);
        let dk = (dnk * den - nk * dden) / (den * den);
        dk / dp
    }
}

fn bernstein(t: f64) -> (f64, f64, f64) {
    let s = 1.0 - t;
    (s * s, 2.0 * s * t, t * t)
}
