#![allow(dead_code)]

use std::f64::consts::PI;

use hyperideal::geom::{self, Point};
use hyperideal::pattern::{probe, DecoratedMetric};
use hyperideal::surface::{Gluing, Side};
use hyperideal::{AngleData, AngleSystem, GluedTriangulation};
use rand::Rng;

pub fn torus() -> GluedTriangulation {
    GluedTriangulation::new(2, (0..3).map(|s| Gluing::new(Side::new(0, s), Side::new(1, s))).collect()).unwrap()
}

pub fn torus_data(theta: f64) -> AngleData {
    AngleData { theta: vec![theta; 3], xi: vec![2.0 * PI] }
}

pub fn single() -> GluedTriangulation {
    GluedTriangulation::new(1, vec![]).unwrap()
}

/// Fan of `n` triangles around a center; closed (interior center) when
/// `closed`, otherwise an open fan.
pub fn fan(n: usize, closed: bool) -> GluedTriangulation {
    let faces: Vec<[usize; 3]> = (0..n)
        .map(|i| {
            let next = if closed { (i + 1) % n + 1 } else { i + 2 };
            [0, i + 1, next]
        })
        .collect();
    GluedTriangulation::from_faces(&faces).unwrap()
}

/// Vertex positions of a fan: center at the origin, rim points at
/// increasing angles.
fn fan_positions<R: Rng>(rng: &mut R, n: usize, closed: bool) -> Vec<Point> {
    let span = if closed { 2.0 * PI } else { rng.gen_range(0.4..1.6) * PI };
    let rim = if closed { n } else { n + 1 };
    let step = span / n as f64;
    let mut pts = vec![[0.0, 0.0]];
    let phase = rng.gen_range(0.0..2.0 * PI);
    for k in 0..rim {
        let a = phase + step * (k as f64 + rng.gen_range(-0.2..0.2));
        let r = rng.gen_range(0.8..1.2);
        pts.push([r * a.cos(), r * a.sin()]);
    }
    pts
}

/// Lengths and radii from vertex positions; radii are a random fraction of
/// the shortest incident edge.
fn metric_from_positions<R: Rng>(rng: &mut R, tri: &GluedTriangulation, pos: &[Point], vertex_of_label: &[usize]) -> DecoratedMetric {
    let mut label = vec![usize::MAX; tri.vertex_count()];
    for (lab, &v) in vertex_of_label.iter().enumerate() {
        label[v] = lab;
    }
    let l: Vec<f64> = tri
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = e.sides()[0].corners();
            geom::dist(pos[label[tri.vertex_of(a)]], pos[label[tri.vertex_of(b)]])
        })
        .collect();
    let mut shortest = vec![f64::INFINITY; tri.vertex_count()];
    for (e, edge) in tri.edges().iter().enumerate() {
        let (a, b) = edge.sides()[0].corners();
        for c in [a, b] {
            let v = tri.vertex_of(c);
            shortest[v] = shortest[v].min(l[e]);
        }
    }
    let r = shortest.iter().map(|s| s * rng.gen_range(0.1..0.45)).collect();
    DecoratedMetric { l, r }
}

/// Random decorated fan disk with 2 to 6 triangles whose probe succeeds.
pub fn random_disk<R: Rng>(rng: &mut R) -> (GluedTriangulation, DecoratedMetric) {
    loop {
        let n = rng.gen_range(2..=6);
        let closed = n >= 3 && rng.gen_bool(0.5);
        let tri = fan(n, closed);
        let pos = fan_positions(rng, n, closed);
        // Face labels are 0..=rim; map each label to its vertex class.
        let labels = pos.len();
        let mut vertex_of_label = vec![usize::MAX; labels];
        let faces: Vec<[usize; 3]> = (0..n)
            .map(|i| [0, i + 1, if closed { (i + 1) % n + 1 } else { i + 2 }])
            .collect();
        for (t, f) in faces.iter().enumerate() {
            for c in 0..3 {
                vertex_of_label[f[c]] = tri.vertex_of(hyperideal::surface::Corner::new(t, c));
            }
        }
        let ok_orientation = faces.iter().all(|f| {
            let (a, b, c) = (pos[f[0]], pos[f[1]], pos[f[2]]);
            (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) > 0.05
        });
        if !ok_orientation {
            continue;
        }
        let dm = metric_from_positions(rng, &tri, &pos, &vertex_of_label);
        if probe(&tri, &dm).is_ok() {
            return (tri, dm);
        }
    }
}

/// Flat one-vertex torus from a random triangle shape and radius.
pub fn random_torus<R: Rng>(rng: &mut R) -> (GluedTriangulation, DecoratedMetric) {
    let tri = torus();
    loop {
        let l = [rng.gen_range(0.7..1.3), rng.gen_range(0.7..1.3), rng.gen_range(0.7..1.3)];
        if !geom::is_triangle(l) {
            continue;
        }
        let shortest = l.iter().cloned().fold(f64::INFINITY, f64::min);
        let dm = DecoratedMetric { l: l.to_vec(), r: vec![shortest * rng.gen_range(0.1..0.45)] };
        if probe(&tri, &dm).is_ok() {
            return (tri, dm);
        }
    }
}

/// Largest relative deviation of `b` from `a` after the best common scale.
pub fn scale_mismatch(a: &DecoratedMetric, b: &DecoratedMetric) -> f64 {
    let lambda = a.r[0] / b.r[0];
    a.l.iter()
        .zip(&b.l)
        .chain(a.r.iter().zip(&b.r))
        .map(|(x, y)| (x - lambda * y).abs() / x.abs())
        .fold(0.0, f64::max)
}

/// A random strictly coherent point: the interior point plus a random
/// tangent perturbation, shrunk until it stays inside.
pub fn random_coherent<R: Rng>(rng: &mut R, tri: &GluedTriangulation, data: &AngleData) -> AngleSystem {
    random_coherent_with_slack(rng, tri, data, 1e-3)
}

pub fn random_coherent_with_slack<R: Rng>(
    rng: &mut R,
    tri: &GluedTriangulation,
    data: &AngleData,
    min_slack: f64,
) -> AngleSystem {
    use hyperideal::coherent::{build_constraints, find_coherent, is_coherent, Feasibility};
    use hyperideal::linalg;
    let cs = build_constraints(tri, data);
    let Feasibility::Feasible { x, .. } = find_coherent(&cs).unwrap() else { panic!("instance infeasible") };
    let basis = linalg::null_space(&cs.eq, linalg::RANK_TOL).basis;
    let k = basis.ncols();
    loop {
        let coeff = nalgebra::DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
        let mut step = 0.5;
        let dir = &basis * coeff;
        for _ in 0..40 {
            let y = x.to_dvector() + step * &dir;
            let cand = AngleSystem::from_vec(y.iter().copied().collect());
            let rep = is_coherent(&cand, &cs).unwrap();
            if rep.coherent && rep.min_slack > min_slack {
                return cand;
            }
            step *= 0.5;
        }
    }
}

/// `∫_a^b f` by tanh-sinh quadrature, tolerant of integrable endpoint
/// singularities. Nodes are generated from the endpoint distances so they
/// never collide with the endpoints in floating point.
pub fn tanh_sinh(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let w = b - a;
    let h = 1.0 / 128.0;
    let mut sum = 0.0;
    let mut k: i64 = -(6.0 / h) as i64;
    while (k as f64) * h <= 6.0 {
        let t = k as f64 * h;
        let u = PI / 2.0 * t.sinh();
        // s = (1 + tanh u)/2 and 1 − s, both without cancellation.
        let s = 1.0 / (1.0 + (-2.0 * u).exp());
        let s_c = 1.0 / (1.0 + (2.0 * u).exp());
        let ds = PI * t.cosh() * s * s_c;
        let xi = if s < 0.5 { a + w * s } else { b - w * s_c };
        if xi > a && xi < b && ds > 0.0 {
            sum += f(xi) * ds;
        }
        k += 1;
    }
    sum * w * h
}

/// `−∫_0^x log|2 sin ξ| dξ` for `x ∈ [0, π]` by quadrature, split at π/2 and
/// folded with `ξ ↦ π − ξ` so the only singularity sits at `ξ = 0`.
pub fn lob_quadrature(x: f64) -> f64 {
    let integral = |lo: f64, hi: f64| tanh_sinh(lo, hi, |xi| (2.0 * xi.sin()).ln());
    if x == 0.0 {
        0.0
    } else if x <= PI / 2.0 {
        -integral(0.0, x)
    } else {
        // ∫_{π/2}^{x} = ∫_{π−x}^{π/2} after folding.
        -(integral(0.0, PI / 2.0) + integral(PI - x, PI / 2.0))
    }
}

/// Uniform sample of the open set Δ by rejection.
pub fn sample_delta<R: Rng>(rng: &mut R) -> hyperideal::TetAngles {
    loop {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let (lo, hi) = (u.min(v), u.max(v));
        let gamma = [PI * lo, PI * (hi - lo), PI * (1.0 - hi)];
        let alpha = [rng.gen_range(0.0..PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..PI)];
        let t = hyperideal::TetAngles::new(alpha, gamma);
        if t.in_open() {
            return t;
        }
    }
}
