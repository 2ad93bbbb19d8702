//! Speed profiles `𝓥 = { f(a) a : |a| = 1 }`.

use serde::{Deserialize, Serialize};

use super::geometry::{cross, dot, normalize, scale, sub, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpeedProfile {
    Isotropic { speed: f64 },
    /// Planar ellipse with semi-axes `a` (along the rotated x-axis) and `b`,
    /// rotated counterclockwise by `theta`.
    Elliptic { a: f64, b: f64, theta: f64 },
    /// Ellipsoid with semi-axes `axes` along the columns of `rotation`.
    Ellipsoid { axes: [f64; 3], rotation: [[f64; 3]; 3] },
    /// Star-shaped closed polygon around the origin (the sampled kind:
    /// velocities between table directions are interpolated linearly).
    Polygon { vertices: Vec<[f64; 2]> },
    /// Star-shaped closed triangulated surface around the origin.
    Polyhedron { triangles: Vec<[Vec3; 3]> },
    /// `{ v : max(v₁²+v₂², v₂²+v₃², v₁²+v₃²) ≤ F² }`.
    Tricylinder { speed: f64 },
}

impl SpeedProfile {
    /// Ellipsoid rotated by `angle` about the z-axis.
    pub fn ellipsoid_about_z(axes: [f64; 3], angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        SpeedProfile::Ellipsoid { axes, rotation: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Polygon through `speeds[k]·(cos θ_k, sin θ_k)` for increasing angles.
    pub fn sampled(angles: &[f64], speeds: &[f64]) -> Self {
        let vertices = angles.iter().zip(speeds).map(|(&t, &s)| [s * t.cos(), s * t.sin()]).collect();
        SpeedProfile::Polygon { vertices }
    }

    /// Unit octahedron whose positive-orthant face is replaced by a pyramid
    /// with apex `f_hat·(1,1,1)/√3`.
    pub fn orthant_pyramid(f_hat: f64) -> Self {
        let apex = scale([1.0, 1.0, 1.0], f_hat / 3f64.sqrt());
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut triangles = vec![[apex, e[0], e[1]], [apex, e[1], e[2]], [apex, e[2], e[0]]];
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    if sx > 0.0 && sy > 0.0 && sz > 0.0 {
                        continue;
                    }
                    triangles.push([[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, sz]]);
                }
            }
        }
        SpeedProfile::Polyhedron { triangles }
    }

    /// Uniform speed if the profile is a circle or sphere.
    pub fn isotropic_speed(&self) -> Option<f64> {
        match self {
            SpeedProfile::Isotropic { speed } => Some(*speed),
            _ => None,
        }
    }

    /// Speed `f(d)` in direction `d` (any nonzero vector).
    pub fn speed(&self, dir: Vec3) -> f64 {
        let d = normalize(dir);
        match self {
            SpeedProfile::Isotropic { speed } => *speed,
            SpeedProfile::Elliptic { a, b, theta } => {
                let u = rotate2(d, -theta);
                1.0 / ((u[0] / a).powi(2) + (u[1] / b).powi(2)).sqrt()
            }
            SpeedProfile::Ellipsoid { axes, rotation } => {
                let u = mul_transpose(rotation, d);
                1.0 / (0..3).map(|i| (u[i] / axes[i]).powi(2)).sum::<f64>().sqrt()
            }
            SpeedProfile::Polygon { vertices } => polygon_hit(vertices, d),
            SpeedProfile::Polyhedron { triangles } => polyhedron_hit(triangles, d),
            SpeedProfile::Tricylinder { speed } => {
                let q = [d[0] * d[0], d[1] * d[1], d[2] * d[2]];
                speed / (q[0] + q[1]).max(q[1] + q[2]).max(q[0] + q[2]).sqrt()
            }
        }
    }

    pub fn velocity(&self, dir: Vec3) -> Vec3 {
        scale(normalize(dir), self.speed(dir))
    }

    /// Outward unit normal of `𝓥` at the boundary point `v`; `None` for the
    /// kinds with corners.
    pub fn normal(&self, v: Vec3) -> Option<Vec3> {
        match self {
            SpeedProfile::Isotropic { .. } => Some(normalize(v)),
            SpeedProfile::Elliptic { a, b, theta } => {
                let u = rotate2(v, -theta);
                Some(normalize(rotate2([u[0] / (a * a), u[1] / (b * b), 0.0], *theta)))
            }
            SpeedProfile::Ellipsoid { axes, rotation } => {
                let u = mul_transpose(rotation, v);
                let g = [u[0] / (axes[0] * axes[0]), u[1] / (axes[1] * axes[1]), u[2] / (axes[2] * axes[2])];
                Some(normalize(mul(rotation, g)))
            }
            _ => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, SpeedProfile::Isotropic { .. } | SpeedProfile::Elliptic { .. } | SpeedProfile::Ellipsoid { .. })
    }

    /// `(F₁, F₂)`: exact for the smooth kinds, sampled otherwise.
    pub fn speed_bounds(&self) -> (f64, f64) {
        match self {
            SpeedProfile::Isotropic { speed } => (*speed, *speed),
            SpeedProfile::Elliptic { a, b, .. } => (a.min(*b), a.max(*b)),
            SpeedProfile::Ellipsoid { axes, .. } => {
                (axes.iter().cloned().fold(f64::INFINITY, f64::min), axes.iter().cloned().fold(0.0, f64::max))
            }
            SpeedProfile::Tricylinder { speed } => (*speed, speed * 1.5f64.sqrt()),
            SpeedProfile::Polygon { .. } => {
                let speeds: Vec<f64> = (0..3600)
                    .map(|k| {
                        let t = k as f64 * std::f64::consts::TAU / 3600.0;
                        self.speed([t.cos(), t.sin(), 0.0])
                    })
                    .collect();
                min_max(&speeds)
            }
            SpeedProfile::Polyhedron { .. } => {
                let mut speeds = Vec::new();
                for i in 0..=60 {
                    let phi = std::f64::consts::PI * i as f64 / 60.0;
                    for j in 0..120 {
                        let t = std::f64::consts::TAU * j as f64 / 120.0;
                        speeds.push(self.speed([phi.sin() * t.cos(), phi.sin() * t.sin(), phi.cos()]));
                    }
                }
                min_max(&speeds)
            }
        }
    }
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, 0.0), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn rotate2(v: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], 0.0]
}

fn mul(r: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    [dot(r[0], v), dot(r[1], v), dot(r[2], v)]
}

fn mul_transpose(r: &[[f64; 3]; 3], v: Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (i, row) in r.iter().enumerate() {
        for j in 0..3 {
            out[j] += row[j] * v[i];
        }
    }
    out
}

/// Distance along the unit ray `d` to the polygon boundary.
fn polygon_hit(vertices: &[[f64; 2]], d: Vec3) -> f64 {
    let n = vertices.len();
    let mut best: f64 = 0.0;
    for k in 0..n {
        let a = vertices[k];
        let b = vertices[(k + 1) % n];
        let e = [b[0] - a[0], b[1] - a[1]];
        // Solve t d = a + s e.
        let det = d[0] * (-e[1]) + e[0] * d[1];
        if det.abs() < 1e-300 {
            continue;
        }
        let t = (a[0] * (-e[1]) + e[0] * a[1]) / det;
        let s = (d[0] * a[1] - d[1] * a[0]) / det;
        if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            best = best.max(t);
        }
    }
    assert!(best > 0.0, "ray does not meet the polygon; profile must be star-shaped around 0");
    best
}

/// Distance along the unit ray `d` to the triangulated surface.
fn polyhedron_hit(triangles: &[[Vec3; 3]], d: Vec3) -> f64 {
    let mut best: f64 = 0.0;
    for tri in triangles {
        let e1 = sub(tri[1], tri[0]);
        let e2 = sub(tri[2], tri[0]);
        let p = cross(d, e2);
        let det = dot(e1, p);
        if det.abs() < 1e-300 {
            continue;
        }
        let tv = scale(tri[0], -1.0);
        let u = dot(tv, p) / det;
        let q = cross(tv, e1);
        let v = dot(d, q) / det;
        let t = dot(e2, q) / det;
        if t > 0.0 && u >= -1e-12 && v >= -1e-12 && u + v <= 1.0 + 1e-12 {
            best = best.max(t);
        }
    }
    assert!(best > 0.0, "ray does not meet the surface; profile must be star-shaped around 0");
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_axis_speeds() {
        let e = SpeedProfile::Elliptic { a: 2.0, b: 1.0, theta: 0.0 };
        assert!((e.speed([1.0, 0.0, 0.0]) - 2.0).abs() < 1e-15);
        assert!((e.speed([0.0, 3.0, 0.0]) - 1.0).abs() < 1e-15);
        let r = SpeedProfile::Elliptic { a: 2.0, b: 1.0, theta: std::f64::consts::FRAC_PI_2 };
        assert!((r.speed([0.0, 1.0, 0.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_normal_matches_gradient() {
        let e = SpeedProfile::Elliptic { a: 2.0, b: 1.0, theta: 0.3 };
        let v = e.velocity([1.0, 1.0, 0.0]);
        let n = e.normal(v).unwrap();
        // Tangent by finite difference along the boundary.
        let v2 = e.velocity([1.0, 1.0 + 1e-6, 0.0]);
        let t = normalize(sub(v2, v));
        assert!(dot(n, t).abs() < 1e-5);
        assert!(dot(n, v) > 0.0);
    }

    #[test]
    fn pyramid_apex_speed() {
        let p = SpeedProfile::orthant_pyramid(3f64.sqrt());
        assert!((p.speed([1.0, 1.0, 1.0]) - 3f64.sqrt()).abs() < 1e-14);
        assert!((p.speed([1.0, 0.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!((p.speed([1.0, 1.0, 0.0]) - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((p.speed([-1.0, -1.0, -1.0]) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn tricylinder_planar_slices_are_round() {
        let t = SpeedProfile::Tricylinder { speed: 2.0 };
        assert!((t.speed([1.0, 1.0, 0.0]) - 2.0).abs() < 1e-15);
        assert!((t.speed([0.0, 0.3, 0.7]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_polygon_hits_vertices() {
        let angles: Vec<f64> = (0..8).map(|k| k as f64 * std::f64::consts::FRAC_PI_4).collect();
        let p = SpeedProfile::sampled(&angles, &[1.0; 8]);
        assert!((p.speed([1.0, 1.0, 0.0]) - 1.0).abs() < 1e-14);
        let mid = p.speed([(0.125 * std::f64::consts::PI).cos(), (0.125 * std::f64::consts::PI).sin(), 0.0]);
        assert!(mid < 1.0 && mid > 0.9);
    }
}
