//! Planar helpers: triangle placement, circles, rigid motions.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

/// Strict triangle inequalities for `(l12, l23, l31)`.
pub fn is_triangle(l: [f64; 3]) -> bool {
    l.iter().all(|v| *v > 0.0 && v.is_finite())
        && l[0] < l[1] + l[2]
        && l[1] < l[2] + l[0]
        && l[2] < l[0] + l[1]
}

/// Vertex 1 at the origin, vertex 2 on the positive x-axis, vertex 3 above.
pub fn place_triangle(l: [f64; 3]) -> [Point; 3] {
    let [l12, l23, l31] = l;
    let x = (l12 * l12 + l31 * l31 - l23 * l23) / (2.0 * l12);
    let y = (l31 * l31 - x * x).max(0.0).sqrt();
    [[0.0, 0.0], [l12, 0.0], [x, y]]
}

/// Interior angles at vertices 1, 2, 3 from the law of cosines.
pub fn triangle_angles(l: [f64; 3]) -> [f64; 3] {
    let [l12, l23, l31] = l;
    let angle = |adj1: f64, adj2: f64, opp: f64| {
        ((adj1 * adj1 + adj2 * adj2 - opp * opp) / (2.0 * adj1 * adj2)).clamp(-1.0, 1.0).acos()
    };
    [angle(l12, l31, l23), angle(l23, l12, l31), angle(l31, l23, l12)]
}

/// Radical center of three circles and the power of that point, which is
/// the squared radius of the common orthogonal circle when positive.
pub fn radical_center(p: [Point; 3], r: [f64; 3]) -> (Point, f64) {
    let rhs = |j: usize| {
        dot(p[j], p[j]) - r[j] * r[j] - dot(p[0], p[0]) + r[0] * r[0]
    };
    let u = sub(p[1], p[0]);
    let v = sub(p[2], p[0]);
    let det = 2.0 * cross(u, v);
    let (b1, b2) = (rhs(1), rhs(2));
    let c = [(b1 * v[1] - b2 * u[1]) / det, (u[0] * b2 - v[0] * b1) / det];
    let d = sub(c, p[0]);
    (c, dot(d, d) - r[0] * r[0])
}

/// Cosine of the intersection angle between two circles, oriented so that
/// coinciding circles give 1 and orthogonal circles give 0.
pub fn circle_angle_cos(a: &Circle, b: &Circle) -> f64 {
    let d2 = dot(sub(a.center, b.center), sub(a.center, b.center));
    (a.radius * a.radius + b.radius * b.radius - d2) / (2.0 * a.radius * b.radius)
}

/// Signed distance from `c` to the line through `a` and `b`, positive on the
/// left of `a → b`.
pub fn signed_line_distance(c: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    cross(ab, sub(c, a)) / ab[0].hypot(ab[1])
}

/// Orientation-preserving rigid motion `p ↦ R(rotation) p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub rotation: f64,
    pub translation: Point,
}

impl Isometry {
    pub fn identity() -> Self {
        Self { rotation: 0.0, translation: [0.0, 0.0] }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.rotation.sin_cos();
        [c * p[0] - s * p[1] + self.translation[0], s * p[0] + c * p[1] + self.translation[1]]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let t = self.apply(other.translation);
        Isometry { rotation: self.rotation + other.rotation, translation: t }
    }

    pub fn inverse(&self) -> Isometry {
        let r = Isometry { rotation: -self.rotation, translation: [0.0, 0.0] };
        let t = r.apply(self.translation);
        Isometry { rotation: -self.rotation, translation: [-t[0], -t[1]] }
    }

    /// The motion taking `a0 → a1` and the direction of `b0 − a0` to that of
    /// `b1 − a1`.
    pub fn aligning(a0: Point, b0: Point, a1: Point, b1: Point) -> Isometry {
        let d0 = sub(b0, a0);
        let d1 = sub(b1, a1);
        let rotation = d1[1].atan2(d1[0]) - d0[1].atan2(d0[0]);
        let r = Isometry { rotation, translation: [0.0, 0.0] };
        let ra = r.apply(a0);
        Isometry { rotation, translation: [a1[0] - ra[0], a1[1] - ra[1]] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_orthocircle() {
        let rho = 0.4;
        let p = place_triangle([2.0; 3]);
        let (c, r2) = radical_center(p, [rho; 3]);
        assert!((c[0] - 1.0).abs() < 1e-15 && (c[1] - 3f64.sqrt() / 3.0).abs() < 1e-15);
        assert!((r2 - (4.0 / 3.0 - rho * rho)).abs() < 1e-14);
    }

    #[test]
    fn isometry_algebra() {
        let g = Isometry { rotation: 0.7, translation: [1.0, -2.0] };
        let h = Isometry { rotation: -2.1, translation: [0.3, 0.5] };
        let p = [0.25, 1.5];
        let gh = g.compose(&h).apply(p);
        let seq = g.apply(h.apply(p));
        assert!(dist(gh, seq) < 1e-14);
        assert!(dist(g.inverse().apply(g.apply(p)), p) < 1e-14);
        let m = Isometry::aligning([0.0, 0.0], [1.0, 0.0], [2.0, 2.0], [2.0, 3.0]);
        assert!(dist(m.apply([0.0, 0.0]), [2.0, 2.0]) < 1e-15);
        assert!(dist(m.apply([1.0, 0.0]), [2.0, 3.0]) < 1e-15);
    }

    #[test]
    fn triangle_angles_sum_to_pi() {
        let a = triangle_angles([3.0, 4.0, 5.0]);
        assert!((a.iter().sum::<f64>() - std::f64::consts::PI).abs() < 1e-15);
        assert!((a[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
