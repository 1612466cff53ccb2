//! From a critical angle system to radii and edge lengths, and back.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coherent::{alpha_index, build_constraints, is_coherent, AngleSystem};
use crate::energy::{EnergyError, TetAngles};
use crate::geom::{self, Circle, Isometry, Point};
use crate::solve::{objective_grad, vertex_potentials};
use crate::surface::{AngleData, Corner, Edge, GluedTriangulation, GluingRecord, Side, SurfaceError};

/// Gradient mismatches above this mean the angle system is not critical.
pub const CRITICALITY_TOL: f64 = 1e-7;
/// Agreement required between the two ways of computing an interior `θ`.
pub const THETA_CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("angle system is not critical: {what} residual {residual:.3e}")]
    NotCritical { what: &'static str, residual: f64 },
    #[error("surface is not connected")]
    Disconnected,
    #[error("truncated length of edge {edge} is {value}, must be positive")]
    NonPositiveLength { edge: usize, value: f64 },
    #[error("triangle {triangle}: side lengths {lengths:?} violate the triangle inequality")]
    NotATriangle { triangle: usize, lengths: [f64; 3] },
    #[error("edge {edge}: vertex circles touch or overlap (l = {length}, r_i + r_j = {radii_sum})")]
    CirclesOverlap { edge: usize, length: f64, radii_sum: f64 },
    #[error("triangle {triangle}: no circle orthogonal to the vertex circles (power {power:.3e})")]
    NoOrthocircle { triangle: usize, power: f64 },
    #[error("triangle {triangle}: line of side {side} misses the face circle")]
    EdgeMissesCircle { triangle: usize, side: usize },
    #[error("edge {edge}: face circle meets the opposite vertex circle at {angle} > pi/2")]
    ConditionTwo { edge: usize, angle: f64 },
    #[error("edge {edge}: theta from angles {from_angles} differs from face circles {from_circles}")]
    ThetaMismatch { edge: usize, from_angles: f64, from_circles: f64 },
    #[error("{0}")]
    Dimension(String),
    #[error("read-off angles are not coherent: {0}")]
    NotCoherent(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Truncated hyperbolic edge lengths `a_ij` and horosphere-truncated
/// vertex lengths `a_i` (gauge: `a = 0` at vertex 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedLengths {
    pub a_edge: Vec<f64>,
    pub a_vertex: Vec<f64>,
    /// Largest `|∂F/∂α^t − ∂F/∂α^t′|` seen while averaging.
    pub edge_residual: f64,
    /// Largest off-tree mismatch in the vertex integration, in gradient units.
    pub cycle_residual: f64,
}

/// Euclidean edge lengths and vertex-circle radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoratedMetric {
    /// Indexed like [`GluedTriangulation::edges`].
    pub l: Vec<f64>,
    /// Indexed like [`GluedTriangulation::vertices`].
    pub r: Vec<f64>,
}

impl DecoratedMetric {
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { l: self.l.iter().map(|v| v * lambda).collect(), r: self.r.iter().map(|v| v * lambda).collect() }
    }

    /// `(l12, l23, l31)` of triangle `t`.
    pub fn triangle_lengths(&self, tri: &GluedTriangulation, t: usize) -> [f64; 3] {
        [0, 1, 2].map(|s| self.l[tri.edge_of(Side::new(t, s))])
    }

    /// Radii at corners 0, 1, 2 of triangle `t`.
    pub fn triangle_radii(&self, tri: &GluedTriangulation, t: usize) -> [f64; 3] {
        [0, 1, 2].map(|c| self.r[tri.vertex_of(Corner::new(t, c))])
    }

    /// Checks sizes, triangle inequalities and disjointness of adjacent
    /// vertex circles.
    pub fn validate(&self, tri: &GluedTriangulation) -> Result<(), PatternError> {
        if self.l.len() != tri.edge_count() || self.r.len() != tri.vertex_count() {
            return Err(PatternError::Dimension(format!(
                "expected {} lengths and {} radii, got {} and {}",
                tri.edge_count(),
                tri.vertex_count(),
                self.l.len(),
                self.r.len()
            )));
        }
        if let Some(v) = self.r.iter().position(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(PatternError::Dimension(format!("radius of vertex {v} must be positive")));
        }
        for t in 0..tri.triangle_count() {
            let lengths = self.triangle_lengths(tri, t);
            if !geom::is_triangle(lengths) {
                return Err(PatternError::NotATriangle { triangle: t, lengths });
            }
        }
        for (e, edge) in tri.edges().iter().enumerate() {
            let [ri, rj] = edge_radii(self, tri, edge);
            if !(self.l[e] > ri + rj) {
                return Err(PatternError::CirclesOverlap { edge: e, length: self.l[e], radii_sum: ri + rj });
            }
        }
        Ok(())
    }
}

fn edge_endpoints(tri: &GluedTriangulation, edge: &Edge) -> [usize; 2] {
    let side = edge.sides()[0];
    let (a, b) = side.corners();
    [tri.vertex_of(a), tri.vertex_of(b)]
}

fn edge_radii(dm: &DecoratedMetric, tri: &GluedTriangulation, edge: &Edge) -> [f64; 2] {
    edge_endpoints(tri, edge).map(|v| dm.r[v])
}

/// `a_ij = −2 ∂F/∂α_ij` (averaged over the two sides of interior edges) and
/// vertex lengths integrated from `a_i − a_j = −2 (∂F/∂γ_i − ∂F/∂γ_j)`.
pub fn truncated_lengths(x: &AngleSystem, tri: &GluedTriangulation) -> Result<TruncatedLengths, PatternError> {
    if x.triangle_count() != tri.triangle_count() {
        return Err(PatternError::Dimension(format!(
            "angle system has {} triangles, surface has {}",
            x.triangle_count(),
            tri.triangle_count()
        )));
    }
    let g = objective_grad(x)?;
    let mut edge_residual: f64 = 0.0;
    let mut a_edge = Vec::with_capacity(tri.edge_count());
    for (e, edge) in tri.edges().iter().enumerate() {
        let value = match *edge {
            Edge::Interior { a, b, .. } => {
                let (ga, gb) = (g[alpha_index(a)], g[alpha_index(b)]);
                edge_residual = edge_residual.max((ga - gb).abs());
                -(ga + gb)
            }
            Edge::Boundary { side } => -2.0 * g[alpha_index(side)],
        };
        if !(value > 0.0) {
            return Err(PatternError::NonPositiveLength { edge: e, value });
        }
        a_edge.push(value);
    }
    if edge_residual > CRITICALITY_TOL {
        return Err(PatternError::NotCritical { what: "edge", residual: edge_residual });
    }
    let (a_vertex, cycle, connected) = vertex_potentials(tri, g.as_slice());
    if !connected {
        return Err(PatternError::Disconnected);
    }
    let cycle_residual = cycle / 2.0;
    if cycle_residual > CRITICALITY_TOL {
        return Err(PatternError::NotCritical { what: "cycle", residual: cycle_residual });
    }
    Ok(TruncatedLengths { a_edge, a_vertex, edge_residual, cycle_residual })
}

/// `r_i = e^{−a_i}` and `l_ij² = r_i² + r_j² + 2 r_i r_j cosh a_ij`.
pub fn metric_from_lengths(tl: &TruncatedLengths, tri: &GluedTriangulation) -> DecoratedMetric {
    let r: Vec<f64> = tl.a_vertex.iter().map(|a| (-a).exp()).collect();
    let l = tri
        .edges()
        .iter()
        .zip(&tl.a_edge)
        .map(|(edge, a)| {
            let [i, j] = edge_endpoints(tri, edge);
            let (ri, rj) = (r[i], r[j]);
            (ri * ri + rj * rj + 2.0 * ri * rj * a.cosh()).sqrt()
        })
        .collect();
    DecoratedMetric { l, r }
}

/// Face circle of a decorated triangle in its canonical placement.
pub fn orthocircle(l: [f64; 3], r: [f64; 3]) -> Result<Circle, PatternError> {
    let p = geom::place_triangle(l);
    orthocircle_at(p, r, 0)
}

fn orthocircle_at(p: [Point; 3], r: [f64; 3], triangle: usize) -> Result<Circle, PatternError> {
    let (center, power) = geom::radical_center(p, r);
    if !(power > 0.0) {
        return Err(PatternError::NoOrthocircle { triangle, power });
    }
    Ok(Circle { center, radius: power.sqrt() })
}

/// Angles `(α₁₂, α₂₃, α₃₁, γ₁, γ₂, γ₃)` of one decorated triangle: `γ_i` is
/// the interior angle at vertex `i`, `α_ij` the angle between side `ij` and
/// the face circle, `cos α_ij = h_ij / R` with `h_ij` the signed distance of
/// the face-circle center from side `ij` (positive inside).
pub fn read_angles(l: [f64; 3], r: [f64; 3]) -> Result<TetAngles<f64>, PatternError> {
    read_angles_at(l, r, 0)
}

fn read_angles_at(l: [f64; 3], r: [f64; 3], triangle: usize) -> Result<TetAngles<f64>, PatternError> {
    if !geom::is_triangle(l) {
        return Err(PatternError::NotATriangle { triangle, lengths: l });
    }
    let p = geom::place_triangle(l);
    let circle = orthocircle_at(p, r, triangle)?;
    let mut alpha = [0.0; 3];
    for s in 0..3 {
        let h = geom::signed_line_distance(circle.center, p[s], p[(s + 1) % 3]);
        let c = h / circle.radius;
        if !(c.abs() < 1.0) {
            return Err(PatternError::EdgeMissesCircle { triangle, side: s });
        }
        alpha[s] = c.acos();
    }
    Ok(TetAngles::new(alpha, geom::triangle_angles(l)))
}

/// Condition-(ii) margin `π/2 − φ` for a face circle and a vertex circle,
/// where `cos φ = (d² − R² − ρ²)/(2Rρ)`. Disjoint circles count as `π/2`,
/// nested circles as `−π/2`.
pub fn condition_two_margin(face: &Circle, vertex: &Circle) -> f64 {
    let cos = -geom::circle_angle_cos(face, vertex);
    if cos > 1.0 {
        FRAC_PI_2
    } else if cos < -1.0 {
        -FRAC_PI_2
    } else {
        FRAC_PI_2 - cos.acos()
    }
}

/// Places triangle `t` canonically and triangle `t′` across interior edge
/// `(a, b)` so that the shared side matches.
fn abutting(
    dm: &DecoratedMetric,
    tri: &GluedTriangulation,
    a: Side,
    b: Side,
) -> ([Point; 3], [Point; 3]) {
    let p = geom::place_triangle(dm.triangle_lengths(tri, a.triangle));
    let q = geom::place_triangle(dm.triangle_lengths(tri, b.triangle));
    // Corner s of t meets corner s'+1 of t', corner s+1 meets corner s'.
    let m = Isometry::aligning(q[(b.side + 1) % 3], q[b.side], p[a.side], p[(a.side + 1) % 3]);
    (p, q.map(|v| m.apply(v)))
}

struct EdgeGeometry {
    theta_from_circles: f64,
    margin: f64,
}

fn interior_edge_geometry(
    dm: &DecoratedMetric,
    tri: &GluedTriangulation,
    a: Side,
    b: Side,
) -> Result<EdgeGeometry, PatternError> {
    let (p, q) = abutting(dm, tri, a, b);
    let rp = dm.triangle_radii(tri, a.triangle);
    let rq = dm.triangle_radii(tri, b.triangle);
    let cp = orthocircle_at(p, rp, a.triangle)?;
    let cq = orthocircle_at(q, rq, b.triangle)?;
    let theta_from_circles = geom::circle_angle_cos(&cp, &cq).clamp(-1.0, 1.0).acos();
    let opp_p = (a.side + 2) % 3;
    let opp_q = (b.side + 2) % 3;
    let m1 = condition_two_margin(&cp, &Circle { center: q[opp_q], radius: rq[opp_q] });
    let m2 = condition_two_margin(&cq, &Circle { center: p[opp_p], radius: rp[opp_p] });
    Ok(EdgeGeometry { theta_from_circles, margin: m1.min(m2) })
}

/// Reads the problem data off a decorated triangulation.
pub fn probe(tri: &GluedTriangulation, dm: &DecoratedMetric) -> Result<(AngleData, AngleSystem), PatternError> {
    dm.validate(tri)?;
    let tets = (0..tri.triangle_count())
        .map(|t| read_angles_at(dm.triangle_lengths(tri, t), dm.triangle_radii(tri, t), t))
        .collect::<Result<Vec<_>, _>>()?;
    let x = AngleSystem::from_tets(&tets);
    let mut theta = Vec::with_capacity(tri.edge_count());
    for (e, edge) in tri.edges().iter().enumerate() {
        match *edge {
            Edge::Interior { a, b, .. } => {
                let geo = interior_edge_geometry(dm, tri, a, b)?;
                if geo.margin < 0.0 {
                    return Err(PatternError::ConditionTwo { edge: e, angle: FRAC_PI_2 - geo.margin });
                }
                let from_angles = PI - x.alpha(a) - x.alpha(b);
                if (from_angles - geo.theta_from_circles).abs() > THETA_CROSS_CHECK_TOL {
                    return Err(PatternError::ThetaMismatch {
                        edge: e,
                        from_angles,
                        from_circles: geo.theta_from_circles,
                    });
                }
                theta.push(from_angles.max(0.0));
            }
            Edge::Boundary { side } => theta.push(PI - x.alpha(side)),
        }
    }
    let xi = tri.vertices().iter().map(|cs| cs.iter().map(|&c| x.gamma(c)).sum()).collect();
    let data = AngleData { theta, xi };
    data.validate(tri)?;
    let rep = is_coherent(&x, &build_constraints(tri, &data)).map_err(|e| PatternError::NotCoherent(e.to_string()))?;
    if !rep.coherent {
        let names: Vec<String> = rep.failures.iter().take(3).map(|(l, v)| format!("{l} ({v:.3e})")).collect();
        return Err(PatternError::NotCoherent(names.join(", ")));
    }
    Ok((data, x))
}

/// How well a decorated metric realizes the prescribed angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub theta_residual: f64,
    pub xi_residual: f64,
    /// `min (l_ij − r_i − r_j) / l_ij` over edges.
    pub condition_one_slack: f64,
    /// Smallest `π/2 − φ` over face circles and opposite neighbor vertex circles.
    pub condition_two_margin: f64,
    /// Set when some triangle could not be read at all.
    pub failure: Option<String>,
}

pub fn verify_pattern(tri: &GluedTriangulation, data: &AngleData, dm: &DecoratedMetric) -> PatternReport {
    let mut report = PatternReport {
        theta_residual: f64::INFINITY,
        xi_residual: f64::INFINITY,
        condition_one_slack: f64::INFINITY,
        condition_two_margin: FRAC_PI_2,
        failure: None,
    };
    if dm.l.len() != tri.edge_count() || dm.r.len() != tri.vertex_count() {
        report.failure = Some("metric does not match the triangulation".into());
        return report;
    }
    for (e, edge) in tri.edges().iter().enumerate() {
        let [ri, rj] = edge_radii(dm, tri, edge);
        report.condition_one_slack = report.condition_one_slack.min((dm.l[e] - ri - rj) / dm.l[e]);
    }
    let tets: Result<Vec<_>, _> = (0..tri.triangle_count())
        .map(|t| read_angles_at(dm.triangle_lengths(tri, t), dm.triangle_radii(tri, t), t))
        .collect();
    let tets = match tets {
        Ok(t) => t,
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    let x = AngleSystem::from_tets(&tets);
    let mut theta_res: f64 = 0.0;
    for (e, edge) in tri.edges().iter().enumerate() {
        let th = match *edge {
            Edge::Interior { a, b, .. } => {
                match interior_edge_geometry(dm, tri, a, b) {
                    Ok(geo) => report.condition_two_margin = report.condition_two_margin.min(geo.margin),
                    Err(err) => report.failure = Some(err.to_string()),
                }
                PI - x.alpha(a) - x.alpha(b)
            }
            Edge::Boundary { side } => PI - x.alpha(side),
        };
        theta_res = theta_res.max((th - data.theta[e]).abs());
    }
    let mut xi_res: f64 = 0.0;
    for (v, corners) in tri.vertices().iter().enumerate() {
        let s: f64 = corners.iter().map(|&c| x.gamma(c)).sum();
        xi_res = xi_res.max((s - data.xi[v]).abs());
    }
    report.theta_residual = theta_res;
    report.xi_residual = xi_res;
    report
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryRecord {
    triangles: usize,
    #[serde(default)]
    gluings: Vec<GluingRecord>,
    lengths: Vec<f64>,
    radii: Vec<f64>,
}

/// Parses a geometry file: triangulation plus one length per edge and one
/// radius per vertex.
pub fn parse_geometry(text: &str) -> Result<(GluedTriangulation, DecoratedMetric), PatternError> {
    let rec: GeometryRecord =
        serde_json::from_str(text).map_err(|e| SurfaceError::Schema(e.to_string()))?;
    let tri = GluedTriangulation::new(rec.triangles, rec.gluings.iter().map(GluingRecord::to_gluing).collect())?;
    let dm = DecoratedMetric { l: rec.lengths, r: rec.radii };
    if dm.l.len() != tri.edge_count() || dm.r.len() != tri.vertex_count() {
        return Err(PatternError::Dimension(format!(
            "expected {} lengths and {} radii, got {} and {}",
            tri.edge_count(),
            tri.vertex_count(),
            dm.l.len(),
            dm.r.len()
        )));
    }
    Ok((tri, dm))
}

pub fn geometry_to_json(tri: &GluedTriangulation, dm: &DecoratedMetric) -> String {
    let rec = GeometryRecord {
        triangles: tri.triangle_count(),
        gluings: tri.gluings().iter().map(GluingRecord::from_gluing).collect(),
        lengths: dm.l.clone(),
        radii: dm.r.clone(),
    };
    crate::io::to_json_string(&rec)
}
