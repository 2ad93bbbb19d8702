//! Geometric causality predicates for stencil simplexes.
//!
//! With `v_j = f_j z_j / |z_j|`, a velocity `v(ξ)` reached inside the simplex
//! is written as `θ₁ v₁ + θ₂ v₂`. The simplex is monotone causal when the
//! speed profile inside its sector stays within the parallelogram
//! `θ₁, θ₂ ≤ 1`, and δ-causal when it stays within the quadrilateral cut by
//! `θ₁ + θ₂ δ/C₂ ≤ 1` and `θ₂ + θ₁ δ/C₁ ≤ 1`.
//!
//! For circles and ellipses each constraint is a linear functional of `v`
//! whose maximum over the arc has a closed form; other profiles are sampled.

use serde::Serialize;
use thiserror::Error;

use super::geometry::{combine, cross, dot, norm, normalize, sub, SimplexGeometry, Vec3};
use super::profile::SpeedProfile;
use crate::causality::simplex_grid;

/// Slack on `θ ≤ 1` in 2D.
pub const THETA_TOL: f64 = 1e-12;
/// Slack on the 3D containment tests.
pub const CONTAINMENT_TOL_3D: f64 = 1e-9;
/// Default directions per 2D simplex.
pub const DEFAULT_SAMPLES_2D: usize = 256;
/// Default samples per 3D simplex.
pub const DEFAULT_SAMPLES_3D: usize = 64 * 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("simplex velocities are degenerate")]
    DegenerateSimplex,
    #[error("speed profile has no normal vectors")]
    NormalUnavailable,
    #[error("δ = {delta} exceeds min(C₁, C₂) = {limit}")]
    DeltaTooLarge { delta: f64, limit: f64 },
}

/// Outcome of a containment or sign test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub satisfied: bool,
    /// Largest constraint value (should be ≤ 1) or smallest dot product
    /// (should be ≥ 0), depending on the test.
    pub worst: f64,
    /// Whether a closed form was used instead of sampling.
    pub exact: bool,
}

/// Rows of the inverse of `[v₁ v₂]` in the plane.
fn dual_rows(v1: Vec3, v2: Vec3) -> Result<(Vec3, Vec3), CheckError> {
    let det = v1[0] * v2[1] - v1[1] * v2[0];
    if det.abs() <= 1e-14 * norm(v1) * norm(v2) {
        return Err(CheckError::DegenerateSimplex);
    }
    Ok(([v2[1] / det, -v2[0] / det, 0.0], [-v1[1] / det, v1[0] / det, 0.0]))
}

/// Maximum of `w·v` over the profile arc between the directions `z1` and
/// `z2`: exact for circles and ellipses, sampled otherwise.
fn arc_max(profile: &SpeedProfile, z1: Vec3, z2: Vec3, w: Vec3, samples: usize) -> (f64, bool) {
    let ends = dot(w, profile.velocity(z1)).max(dot(w, profile.velocity(z2)));
    let ellipse = match profile {
        SpeedProfile::Isotropic { speed } => Some((*speed, *speed, 0.0)),
        SpeedProfile::Elliptic { a, b, theta } => Some((*a, *b, *theta)),
        _ => None,
    };
    if let Some((a, b, theta)) = ellipse {
        // v = R D u with |u| = 1, so w·v = (D Rᵀ w)·u peaks at u ∥ D Rᵀ w.
        let (s, c) = theta.sin_cos();
        let wr = [c * w[0] + s * w[1], -s * w[0] + c * w[1]];
        let g = [a * wr[0], b * wr[1]];
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if gn == 0.0 {
            return (ends, true);
        }
        let u = [g[0] / gn, g[1] / gn];
        let p = [a * u[0], b * u[1]];
        let v = [c * p[0] - s * p[1], s * p[0] + c * p[1], 0.0];
        let orient = cross(z1, z2)[2].signum();
        let inside = cross(z1, v)[2] * orient >= 0.0 && cross(v, z2)[2] * orient >= 0.0;
        return (if inside { ends.max(gn) } else { ends }, true);
    }
    let mut best = ends;
    for k in 0..samples {
        let t = k as f64 / (samples - 1).max(1) as f64;
        let d = combine(&[z1, z2], &[1.0 - t, t]);
        best = best.max(dot(w, profile.velocity(d)));
    }
    (best, false)
}

/// Tangent test: the profile inside the sector stays in the
/// parallelogram spanned by `v₁` and `v₂`.
pub fn check_parallelogram_2d(geom: &SimplexGeometry, samples: usize) -> Result<Verdict, CheckError> {
    let [v1, v2]: [Vec3; 2] = geom.velocities().try_into().expect("two vertices");
    let (w1, w2) = dual_rows(v1, v2)?;
    let (z1, z2) = (geom.offsets[0], geom.offsets[1]);
    let (m1, e1) = arc_max(geom.profile, z1, z2, w1, samples);
    let (m2, e2) = arc_max(geom.profile, z1, z2, w2, samples);
    let worst = m1.max(m2);
    Ok(Verdict { satisfied: worst <= 1.0 + THETA_TOL, worst, exact: e1 && e2 })
}

/// Tangent test: `v₁·n̂₂ ≥ 0` and `v₂·n̂₁ ≥ 0`.
pub fn check_tangent_2d(geom: &SimplexGeometry) -> Result<Verdict, CheckError> {
    let v = geom.velocities();
    let n1 = geom.profile.normal(v[0]).ok_or(CheckError::NormalUnavailable)?;
    let n2 = geom.profile.normal(v[1]).ok_or(CheckError::NormalUnavailable)?;
    let worst = dot(v[0], n2).min(dot(v[1], n1));
    Ok(Verdict { satisfied: worst >= -THETA_TOL, worst, exact: true })
}

/// δ-quadrilateral test with corner `w(δ)`.
pub fn check_delta_quad_2d(geom: &SimplexGeometry, delta: f64, samples: usize) -> Result<Verdict, CheckError> {
    let c = geom.vertex_costs();
    let limit = c[0].min(c[1]);
    if delta > limit * (1.0 + 1e-12) {
        return Err(CheckError::DeltaTooLarge { delta, limit });
    }
    let [v1, v2]: [Vec3; 2] = geom.velocities().try_into().expect("two vertices");
    let (w1, w2) = dual_rows(v1, v2)?;
    let f1 = sub(w1, [-w2[0] * delta / c[1], -w2[1] * delta / c[1], 0.0]);
    let f2 = sub(w2, [-w1[0] * delta / c[0], -w1[1] * delta / c[0], 0.0]);
    let (z1, z2) = (geom.offsets[0], geom.offsets[1]);
    let (m1, e1) = arc_max(geom.profile, z1, z2, f1, samples);
    let (m2, e2) = arc_max(geom.profile, z1, z2, f2, samples);
    let worst = m1.max(m2);
    Ok(Verdict { satisfied: worst <= 1.0 + THETA_TOL, worst, exact: e1 && e2 })
}

/// `min(δ₁, δ₂)` with `δ₁ = C₂ (v₂·n̂₁)/(v₁·n̂₁)` and `δ₂` symmetric.
pub fn max_delta_simplex_2d(geom: &SimplexGeometry) -> Result<f64, CheckError> {
    let v = geom.velocities();
    let c = geom.vertex_costs();
    let n1 = geom.profile.normal(v[0]).ok_or(CheckError::NormalUnavailable)?;
    let n2 = geom.profile.normal(v[1]).ok_or(CheckError::NormalUnavailable)?;
    let d1 = c[1] * dot(v[1], n1) / dot(v[0], n1);
    let d2 = c[0] * dot(v[0], n2) / dot(v[1], n2);
    Ok(d1.min(d2))
}

/// Isotropic bound `min_{r, j≠r} ẑ_j·z_r / f` for a simplex of any size.
pub fn isotropic_delta_simplex(offsets: &[Vec3], speed: f64) -> f64 {
    let mut best = f64::INFINITY;
    for (r, &zr) in offsets.iter().enumerate() {
        for (j, &zj) in offsets.iter().enumerate() {
            if j != r {
                best = best.min(dot(normalize(zj), zr) / speed);
            }
        }
    }
    best
}

/// Coefficients of `v` in the plane spanned by `a` and `b`.
fn plane_coords(a: Vec3, b: Vec3, v: Vec3) -> (f64, f64) {
    let (aa, ab, bb) = (dot(a, a), dot(a, b), dot(b, b));
    let (av, bv) = (dot(a, v), dot(b, v));
    let det = aa * bb - ab * ab;
    ((bb * av - ab * bv) / det, (aa * bv - ab * av) / det)
}

/// Result of the 3D simplex test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict3d {
    pub satisfied: bool,
    /// Largest planar-slice coefficient (parallelogram containment).
    pub slice_worst: f64,
    /// Largest `(1 - ξ_r) C(γ_r) / C(ξ)` over the samples.
    pub coefficient_worst: f64,
}

/// Slice test on a three-vertex simplex: every planar slice lies in its
/// parallelogram and every sampled `v(ξ) = θ₁ v_r + θ₂ v(γ_r)` has `θ₂ ≤ 1`.
pub fn check_3d(geom: &SimplexGeometry, samples: usize) -> Result<Verdict3d, CheckError> {
    assert_eq!(geom.m(), 3, "check_3d needs a three-vertex simplex");
    let v = geom.velocities();
    let vol = dot(v[0], cross(v[1], v[2]));
    if vol.abs() <= 1e-14 * norm(v[0]) * norm(v[1]) * norm(v[2]) {
        return Err(CheckError::DegenerateSimplex);
    }
    let side = (samples as f64).sqrt().ceil().max(2.0) as usize;
    let mut slice_worst: f64 = 0.0;
    for (j, k) in [(0, 1), (1, 2), (0, 2)] {
        for s in 0..=side {
            let t = s as f64 / side as f64;
            let d = combine(&[geom.offsets[j], geom.offsets[k]], &[1.0 - t, t]);
            let (a, b) = plane_coords(v[j], v[k], geom.profile.velocity(d));
            slice_worst = slice_worst.max(a).max(b);
        }
    }
    let mut points = simplex_grid(3, side);
    points.push(vec![1.0 / 3.0; 3]);
    let mut coefficient_worst: f64 = 0.0;
    for xi in points {
        let c = geom.cost(&xi);
        for r in (0..3).filter(|&r| xi[r] > 0.0 && xi[r] < 1.0) {
            let gamma: Vec<f64> = (0..3).map(|j| if j == r { 0.0 } else { xi[j] / (1.0 - xi[r]) }).collect();
            coefficient_worst = coefficient_worst.max((1.0 - xi[r]) * geom.cost(&gamma) / c);
        }
    }
    let satisfied = slice_worst <= 1.0 + CONTAINMENT_TOL_3D && coefficient_worst <= 1.0 + CONTAINMENT_TOL_3D;
    Ok(Verdict3d { satisfied, slice_worst, coefficient_worst })
}

/// Normal-vector test: `v_i·n̂(v_j) ≥ 0` for all vertex pairs and
/// `v_r·n̂(ṽ) ≥ 0` on the planar slice opposite `v_r`.
pub fn check_3d_normals(geom: &SimplexGeometry, samples: usize) -> Result<Verdict, CheckError> {
    let v = geom.velocities();
    let normal = |x: Vec3| geom.profile.normal(x).ok_or(CheckError::NormalUnavailable);
    let mut worst = f64::INFINITY;
    for &vi in &v {
        for &vj in &v {
            worst = worst.min(dot(vi, normal(vj)?));
        }
    }
    let side = samples.max(2);
    for r in 0..3 {
        let (j, k) = ((r + 1) % 3, (r + 2) % 3);
        for s in 0..=side {
            let t = s as f64 / side as f64;
            let d = combine(&[geom.offsets[j], geom.offsets[k]], &[1.0 - t, t]);
            worst = worst.min(dot(v[r], normal(geom.profile.velocity(d))?));
        }
    }
    Ok(Verdict { satisfied: worst >= -THETA_TOL, worst, exact: false })
}
