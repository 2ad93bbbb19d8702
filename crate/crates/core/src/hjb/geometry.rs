//! Small vector helpers and simplex geometry.

use super::profile::SpeedProfile;
use crate::optimize::golden_section;

/// Points and directions; 2D problems leave the third coordinate at 0.
pub type Vec3 = [f64; 3];

/// Minimization tolerance for simplex updates.
pub const SIMPLEX_TOL: f64 = 1e-10;

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// `Σ ξ_j z_j`.
pub fn combine(offsets: &[Vec3], xi: &[f64]) -> Vec3 {
    offsets.iter().zip(xi).fold([0.0; 3], |acc, (z, &w)| add(acc, scale(*z, w)))
}

/// `C^s(ξ) = |Σ ξ_j z_j| / f(direction)`.
pub fn simplex_cost(offsets: &[Vec3], profile: &SpeedProfile, xi: &[f64]) -> f64 {
    let x = combine(offsets, xi);
    norm(x) / profile.speed(x)
}

/// A simplex of a stencil together with the local speed profile.
#[derive(Clone, Debug)]
pub struct SimplexGeometry<'a> {
    pub offsets: Vec<Vec3>,
    pub profile: &'a SpeedProfile,
}

impl<'a> SimplexGeometry<'a> {
    pub fn new(offsets: Vec<Vec3>, profile: &'a SpeedProfile) -> Self {
        SimplexGeometry { offsets, profile }
    }

    pub fn m(&self) -> usize {
        self.offsets.len()
    }

    pub fn cost(&self, xi: &[f64]) -> f64 {
        simplex_cost(&self.offsets, self.profile, xi)
    }

    /// `C_j = |z_j| / f_j`.
    pub fn vertex_costs(&self) -> Vec<f64> {
        self.offsets.iter().map(|&z| norm(z) / self.profile.speed(z)).collect()
    }

    /// `v_j = f_j z_j / |z_j|`.
    pub fn velocities(&self) -> Vec<Vec3> {
        self.offsets.iter().map(|&z| self.profile.velocity(z)).collect()
    }

    /// Velocity `v(ξ)` reached when moving towards `Σ ξ_j z_j`.
    pub fn velocity_at(&self, xi: &[f64]) -> Vec3 {
        self.profile.velocity(combine(&self.offsets, xi))
    }

    /// Minimizes `C^s(ξ) + Σ ξ_j U_j` over the simplex.
    pub fn minimize(&self, u: &[f64]) -> (f64, Vec<f64>) {
        simplex_minimize(&self.offsets, self.profile, u)
    }
}

/// Minimizes `C^s(ξ) + Σ ξ_j U_j` over the simplex spanned by `offsets`
/// (one, two or three vertices). Returns the value and the minimizer.
pub fn simplex_minimize(offsets: &[Vec3], profile: &SpeedProfile, u: &[f64]) -> (f64, Vec<f64>) {
    match offsets.len() {
        1 => (simplex_cost(offsets, profile, &[1.0]) + u[0], vec![1.0]),
        2 => {
            let (p, v) = segment_minimize(offsets[0], offsets[1], u[0], u[1], profile);
            (v, vec![1.0 - p, p])
        }
        3 => triangle_minimize(offsets, profile, u),
        m => panic!("simplex modes have 1 to 3 vertices, got {m}"),
    }
}

/// Minimizes over the segment `(1-p) y1 + p y2` with linearly interpolated
/// values. Returns `(p, value)`.
pub fn segment_minimize(y1: Vec3, y2: Vec3, u1: f64, u2: f64, profile: &SpeedProfile) -> (f64, f64) {
    let eval = |p: f64| {
        let x = add(scale(y1, 1.0 - p), scale(y2, p));
        norm(x) / profile.speed(x) + (1.0 - p) * u1 + p * u2
    };
    if let Some(speed) = profile.isotropic_speed() {
        let p = isotropic_segment_argmin(y1, y2, u1, u2, speed);
        let v = eval(p);
        let (v0, v1) = (eval(0.0), eval(1.0));
        // The closed form is exact up to rounding; prefer exact endpoints on ties.
        if v0 <= v {
            return (0.0, v0);
        }
        if v1 <= v {
            return (1.0, v1);
        }
        return (p, v);
    }
    crate::optimize::minimize_on_unit(eval, SIMPLEX_TOL)
}

/// Closed-form minimizer of `|y1 + p(y2-y1)|/f + p(u2-u1)` on `[0, 1]`.
fn isotropic_segment_argmin(y1: Vec3, y2: Vec3, u1: f64, u2: f64, speed: f64) -> f64 {
    let d = sub(y2, y1);
    let a = dot(d, d);
    let b = dot(y1, d);
    let c = dot(y1, y1);
    let k = (u1 - u2) * speed;
    if k * k >= a {
        return if k > 0.0 { 1.0 } else { 0.0 };
    }
    let disc = (a * c - b * b).max(0.0);
    let w = k * (disc / (a - k * k)).sqrt();
    ((w - b) / a).clamp(0.0, 1.0)
}

/// Nested golden section: outer variable `s = ξ₃`, inner variable splits the
/// remaining mass between the first two vertices.
fn triangle_minimize(offsets: &[Vec3], profile: &SpeedProfile, u: &[f64]) -> (f64, Vec<f64>) {
    let inner = |s: f64| {
        let y1 = add(scale(offsets[0], 1.0 - s), scale(offsets[2], s));
        let y2 = add(scale(offsets[1], 1.0 - s), scale(offsets[2], s));
        let u1 = (1.0 - s) * u[0] + s * u[2];
        let u2 = (1.0 - s) * u[1] + s * u[2];
        segment_minimize(y1, y2, u1, u2, profile)
    };
    let outer = |s: f64| inner(s).1;
    let (s_mid, v_mid) = golden_section(outer, 0.0, 1.0, SIMPLEX_TOL);
    let mut best_s = 0.0;
    let mut best = inner(0.0);
    if v_mid < best.1 {
        best_s = s_mid;
        best = inner(s_mid);
    }
    let top = simplex_cost(&offsets[2..], profile, &[1.0]) + u[2];
    if top < best.1 {
        return (top, vec![0.0, 0.0, 1.0]);
    }
    let (t, v) = best;
    (v, vec![(1.0 - best_s) * (1.0 - t), (1.0 - best_s) * t, best_s])
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 0.1;

    #[test]
    fn quadrant_symmetric_values_pick_diagonal() {
        let iso = SpeedProfile::Isotropic { speed: 1.0 };
        let (v, xi) = simplex_minimize(&[[H, 0.0, 0.0], [0.0, H, 0.0]], &iso, &[0.0, 0.0]);
        assert!((v - H / 2f64.sqrt()).abs() < 1e-15);
        assert!((xi[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn large_second_value_degenerates_to_vertex() {
        let iso = SpeedProfile::Isotropic { speed: 1.0 };
        let (v, xi) = simplex_minimize(&[[H, 0.0, 0.0], [0.0, H, 0.0]], &iso, &[0.0, 10.0]);
        assert_eq!(xi, vec![1.0, 0.0]);
        assert!((v - H).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_golden_section() {
        let iso = SpeedProfile::Isotropic { speed: 1.3 };
        let z1 = [H, 0.0, 0.0];
        let z2 = [H, H, 0.0];
        for &(u1, u2) in &[(0.3, 0.25), (0.3, 0.31), (0.0, 0.05), (1.0, 0.95)] {
            let (p, v) = segment_minimize(z1, z2, u1, u2, &iso);
            let eval = |q: f64| {
                let x = add(scale(z1, 1.0 - q), scale(z2, q));
                norm(x) / 1.3 + (1.0 - q) * u1 + q * u2
            };
            let (pg, vg) = crate::optimize::minimize_on_unit(eval, 1e-12);
            assert!((v - vg).abs() < 1e-13, "{v} vs {vg}");
            assert!((p - pg).abs() < 1e-5);
        }
    }
}
