//! Triangulated surfaces given as triangles plus side gluings.
//!
//! Side `s` of a triangle runs from corner `s` to corner `s + 1 (mod 3)`. A
//! gluing `{(t, s), (t', s')}` identifies corner `s` of `t` with corner
//! `s' + 1` of `t'` and corner `s + 1` of `t` with corner `s'` of `t'`, which
//! keeps the triangles' orientations compatible. Non-regular triangulations
//! (a triangle meeting itself, several edges between the same vertices) are
//! allowed; vertices are always derived from the gluings.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::Angle;

/// A side of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Side {
    pub triangle: usize,
    pub side: usize,
}

/// A corner of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Corner {
    pub triangle: usize,
    pub corner: usize,
}

impl Side {
    pub fn new(triangle: usize, side: usize) -> Self {
        Self { triangle, side }
    }

    /// The two corners `(start, end)` of this side.
    pub fn corners(&self) -> (Corner, Corner) {
        (Corner::new(self.triangle, self.side), Corner::new(self.triangle, (self.side + 1) % 3))
    }

    fn flat(&self) -> usize {
        3 * self.triangle + self.side
    }
}

impl Corner {
    pub fn new(triangle: usize, corner: usize) -> Self {
        Self { triangle, corner }
    }

    fn flat(&self) -> usize {
        3 * self.triangle + self.corner
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "side {} of triangle {}", self.side, self.triangle)
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "corner {} of triangle {}", self.corner, self.triangle)
    }
}

/// Identification of two triangle sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub a: Side,
    pub b: Side,
    /// Orientation-reversing identification (corner `s` with corner `s'`).
    /// Accepted by the parser only so it can be reported.
    pub reversed: bool,
}

impl Gluing {
    pub fn new(a: Side, b: Side) -> Self {
        Self { a, b, reversed: false }
    }

    /// Corner pairs identified by this gluing.
    pub fn corner_pairs(&self) -> [(Corner, Corner); 2] {
        let (a0, a1) = self.a.corners();
        let (b0, b1) = self.b.corners();
        if self.reversed {
            [(a0, b0), (a1, b1)]
        } else {
            [(a0, b1), (a1, b0)]
        }
    }
}

/// One invariant violation found by [`validate_surface`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoTriangles,
    SideOutOfRange { gluing: usize, side: Side },
    SelfGluedSide { gluing: usize, side: Side },
    SideGluedTwice { side: Side, gluings: (usize, usize) },
    OrientationReversing { gluing: usize },
    NonManifoldVertex { corner: Corner, max_degree: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoTriangles => write!(f, "triangulation has no triangles"),
            Violation::SideOutOfRange { gluing, side } => {
                write!(f, "gluing {gluing} references nonexistent {side}")
            }
            Violation::SelfGluedSide { gluing, side } => {
                write!(f, "gluing {gluing} glues {side} to itself")
            }
            Violation::SideGluedTwice { side, gluings } => {
                write!(f, "{side} appears in gluings {} and {}", gluings.0, gluings.1)
            }
            Violation::OrientationReversing { gluing } => {
                write!(f, "gluing {gluing} reverses orientation")
            }
            Violation::NonManifoldVertex { corner, max_degree } => write!(
                f,
                "non-manifold vertex at {corner}: its link branches (a corner has {max_degree} neighbours)"
            ),
        }
    }
}

/// Unvalidated triangulation input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangulationInput {
    pub triangle_count: usize,
    pub gluings: Vec<Gluing>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as root.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Lists every invariant violation of a triangulation input; empty iff valid.
pub fn validate_surface(input: &TriangulationInput) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = input.triangle_count;
    if n == 0 {
        out.push(Violation::NoTriangles);
        return out;
    }
    let mut owner: BTreeMap<Side, usize> = BTreeMap::new();
    let mut usable = Vec::new();
    for (g, gl) in input.gluings.iter().enumerate() {
        let mut ok = true;
        for side in [gl.a, gl.b] {
            if side.triangle >= n || side.side > 2 {
                out.push(Violation::SideOutOfRange { gluing: g, side });
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        if gl.a == gl.b {
            out.push(Violation::SelfGluedSide { gluing: g, side: gl.a });
            continue;
        }
        for side in [gl.a, gl.b] {
            if let Some(&first) = owner.get(&side) {
                out.push(Violation::SideGluedTwice { side, gluings: (first, g) });
            } else {
                owner.insert(side, g);
            }
        }
        if gl.reversed {
            out.push(Violation::OrientationReversing { gluing: g });
        }
        usable.push(*gl);
    }

    // Vertex links: corners joined by the identifications. A manifold link
    // is a single path or cycle, i.e. no corner has more than two neighbours.
    let mut uf = UnionFind::new(3 * n);
    let mut degree = vec![0usize; 3 * n];
    for gl in &usable {
        for (p, q) in gl.corner_pairs() {
            uf.union(p.flat(), q.flat());
            degree[p.flat()] += 1;
            degree[q.flat()] += 1;
        }
    }
    let mut worst: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for c in 0..3 * n {
        if degree[c] > 2 {
            let root = uf.find(c);
            let e = worst.entry(root).or_insert((c, degree[c]));
            if degree[c] > e.1 {
                *e = (c, degree[c]);
            }
        }
    }
    for (_, (c, d)) in worst {
        out.push(Violation::NonManifoldVertex { corner: Corner::new(c / 3, c % 3), max_degree: d });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("problem file is not valid: {0}")]
    Schema(String),
    #[error("invalid triangulation: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid angle data: {0}")]
    AngleData(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Interior edges come from gluings, boundary edges from unglued sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Interior { gluing: usize, a: Side, b: Side },
    Boundary { side: Side },
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        matches!(self, Edge::Interior { .. })
    }

    /// The incident sides (two for interior edges, one for boundary edges).
    pub fn sides(&self) -> Vec<Side> {
        match *self {
            Edge::Interior { a, b, .. } => vec![a, b],
            Edge::Boundary { side } => vec![side],
        }
    }
}

/// A validated, immutable triangulated surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluedTriangulation {
    triangle_count: usize,
    gluings: Vec<Gluing>,
    edges: Vec<Edge>,
    side_edge: Vec<usize>,
    side_partner: Vec<Option<Side>>,
    corner_vertex: Vec<usize>,
    vertices: Vec<Vec<Corner>>,
    boundary_vertex: Vec<bool>,
}

impl GluedTriangulation {
    pub fn new(triangle_count: usize, gluings: Vec<Gluing>) -> Result<Self, SurfaceError> {
        let input = TriangulationInput { triangle_count, gluings };
        let violations = validate_surface(&input);
        if !violations.is_empty() {
            return Err(SurfaceError::Invalid(violations));
        }
        Ok(Self::build(input))
    }

    /// Builds the gluings from oriented vertex-labelled faces by matching each
    /// directed side `u → v` with a side `v → u`.
    pub fn from_faces(faces: &[[usize; 3]]) -> Result<Self, SurfaceError> {
        let mut open: BTreeMap<(usize, usize), Side> = BTreeMap::new();
        let mut gluings = Vec::new();
        for (t, f) in faces.iter().enumerate() {
            for s in 0..3 {
                let (u, v) = (f[s], f[(s + 1) % 3]);
                if let Some(other) = open.remove(&(v, u)) {
                    gluings.push(Gluing::new(other, Side::new(t, s)));
                } else if open.insert((u, v), Side::new(t, s)).is_some() {
                    return Err(SurfaceError::Schema(format!(
                        "directed side {u}->{v} occurs twice; faces are not consistently oriented"
                    )));
                }
            }
        }
        Self::new(faces.len(), gluings)
    }

    fn build(input: TriangulationInput) -> Self {
        let n = input.triangle_count;
        let mut side_partner = vec![None; 3 * n];
        let mut side_edge = vec![usize::MAX; 3 * n];
        let mut edges = Vec::new();
        for (g, gl) in input.gluings.iter().enumerate() {
            side_partner[gl.a.flat()] = Some(gl.b);
            side_partner[gl.b.flat()] = Some(gl.a);
            side_edge[gl.a.flat()] = edges.len();
            side_edge[gl.b.flat()] = edges.len();
            edges.push(Edge::Interior { gluing: g, a: gl.a, b: gl.b });
        }
        for flat in 0..3 * n {
            if side_partner[flat].is_none() {
                side_edge[flat] = edges.len();
                edges.push(Edge::Boundary { side: Side::new(flat / 3, flat % 3) });
            }
        }

        let mut uf = UnionFind::new(3 * n);
        let mut degree = vec![0usize; 3 * n];
        for gl in &input.gluings {
            for (p, q) in gl.corner_pairs() {
                uf.union(p.flat(), q.flat());
                degree[p.flat()] += 1;
                degree[q.flat()] += 1;
            }
        }
        // Roots are the smallest corner of each class, so ordering classes by
        // root orders them by their lexicographically smallest corner.
        let mut root_index: BTreeMap<usize, usize> = BTreeMap::new();
        for c in 0..3 * n {
            let r = uf.find(c);
            let next = root_index.len();
            root_index.entry(r).or_insert(next);
        }
        let mut vertices = vec![Vec::new(); root_index.len()];
        let mut corner_vertex = vec![0; 3 * n];
        let mut boundary_vertex = vec![false; root_index.len()];
        for c in 0..3 * n {
            let v = root_index[&uf.find(c)];
            corner_vertex[c] = v;
            vertices[v].push(Corner::new(c / 3, c % 3));
            if degree[c] < 2 {
                boundary_vertex[v] = true;
            }
        }
        Self {
            triangle_count: n,
            gluings: input.gluings,
            edges,
            side_edge,
            side_partner,
            corner_vertex,
            vertices,
            boundary_vertex,
        }
    }

    pub fn triangle_count(&self) -> usize {
        self.triangle_count
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn interior_edge_count(&self) -> usize {
        self.gluings.len()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.len() - self.gluings.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Corners of each vertex class, sorted.
    pub fn vertices(&self) -> &[Vec<Corner>] {
        &self.vertices
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// Edge index of a triangle side.
    pub fn edge_of(&self, side: Side) -> usize {
        self.side_edge[side.flat()]
    }

    /// The side glued to `side`, if any.
    pub fn partner(&self, side: Side) -> Option<Side> {
        self.side_partner[side.flat()]
    }

    /// Vertex class of a corner.
    pub fn vertex_of(&self, corner: Corner) -> usize {
        self.corner_vertex[corner.flat()]
    }

    /// Vertex classes of the three corners of a triangle.
    pub fn triangle_vertices(&self, t: usize) -> [usize; 3] {
        [0, 1, 2].map(|c| self.vertex_of(Corner::new(t, c)))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.triangle_count as i64
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_edge_count() > 0
    }

    /// Connected components of the triangle adjacency graph.
    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.triangle_count);
        for gl in &self.gluings {
            uf.union(gl.a.triangle, gl.b.triangle);
        }
        (0..self.triangle_count).filter(|&t| uf.find(t) == t).count()
    }

    /// A connected surface with boundary and Euler characteristic 1.
    pub fn is_disk(&self) -> bool {
        self.component_count() == 1 && self.has_boundary() && self.euler_characteristic() == 1
    }

    /// Walks around an interior vertex starting at `corner`, crossing the
    /// side that starts at the current corner each time. Returns the visited
    /// corners together with the side crossed after each of them, or `None`
    /// when the walk hits the boundary.
    pub fn corner_cycle(&self, corner: Corner) -> Option<Vec<(Corner, Side)>> {
        let mut out = Vec::new();
        let mut cur = corner;
        loop {
            let out_side = Side::new(cur.triangle, cur.corner);
            let other = self.partner(out_side)?;
            out.push((cur, out_side));
            // Corner `s` of `t` is identified with corner `s' + 1` of `t'`.
            cur = Corner::new(other.triangle, (other.side + 1) % 3);
            if cur == corner {
                return Some(out);
            }
            if out.len() > 3 * self.triangle_count {
                return None;
            }
        }
    }

    pub fn to_input(&self) -> TriangulationInput {
        TriangulationInput { triangle_count: self.triangle_count, gluings: self.gluings.clone() }
    }
}

/// Intersection angles per edge and cone/boundary angles per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleData {
    /// Indexed like [`GluedTriangulation::edges`].
    pub theta: Vec<f64>,
    /// Indexed like [`GluedTriangulation::vertices`].
    pub xi: Vec<f64>,
}

impl AngleData {
    pub fn validate(&self, tri: &GluedTriangulation) -> Result<(), SurfaceError> {
        use std::f64::consts::PI;
        if self.theta.len() != tri.edge_count() {
            return Err(SurfaceError::AngleData(format!(
                "expected {} edge angles, got {}",
                tri.edge_count(),
                self.theta.len()
            )));
        }
        if self.xi.len() != tri.vertex_count() {
            return Err(SurfaceError::AngleData(format!(
                "expected {} vertex angles, got {}",
                tri.vertex_count(),
                self.xi.len()
            )));
        }
        for (e, (&th, edge)) in self.theta.iter().zip(tri.edges()).enumerate() {
            let ok = match edge {
                Edge::Interior { .. } => (0.0..PI).contains(&th),
                Edge::Boundary { .. } => th > 0.0 && th < PI,
            };
            if !ok {
                let range = if edge.is_interior() { "[0, pi)" } else { "(0, pi)" };
                return Err(SurfaceError::AngleData(format!(
                    "theta of edge {e} is {th}, outside {range}"
                )));
            }
        }
        for (v, &x) in self.xi.iter().enumerate() {
            if !(x > 0.0 && x.is_finite()) {
                return Err(SurfaceError::AngleData(format!("xi of vertex {v} is {x}, must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct GluingRecord {
    pub a: [usize; 2],
    pub b: [usize; 2],
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reversed: bool,
}

impl GluingRecord {
    pub fn from_gluing(g: &Gluing) -> Self {
        Self { a: [g.a.triangle, g.a.side], b: [g.b.triangle, g.b.side], reversed: g.reversed }
    }

    pub fn to_gluing(&self) -> Gluing {
        Gluing {
            a: Side::new(self.a[0], self.a[1]),
            b: Side::new(self.b[0], self.b[1]),
            reversed: self.reversed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ThetaRecord {
    pub interior: Vec<Angle>,
    pub boundary: Vec<Angle>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ProblemRecord {
    pub triangles: usize,
    #[serde(default)]
    pub gluings: Vec<GluingRecord>,
    pub theta: ThetaRecord,
    pub xi: Vec<Angle>,
}

/// Parses a problem file into a validated triangulation and angle data.
pub fn parse_problem(text: &str) -> Result<(GluedTriangulation, AngleData), SurfaceError> {
    let rec: ProblemRecord =
        serde_json::from_str(text).map_err(|e| SurfaceError::Schema(e.to_string()))?;
    problem_from_record(&rec)
}

pub(crate) fn problem_from_record(rec: &ProblemRecord) -> Result<(GluedTriangulation, AngleData), SurfaceError> {
    let tri = GluedTriangulation::new(
        rec.triangles,
        rec.gluings.iter().map(GluingRecord::to_gluing).collect(),
    )?;
    if rec.theta.interior.len() != tri.interior_edge_count() {
        return Err(SurfaceError::AngleData(format!(
            "expected {} interior theta values (one per gluing), got {}",
            tri.interior_edge_count(),
            rec.theta.interior.len()
        )));
    }
    if rec.theta.boundary.len() != tri.boundary_edge_count() {
        return Err(SurfaceError::AngleData(format!(
            "expected {} boundary theta values (one per unglued side), got {}",
            tri.boundary_edge_count(),
            rec.theta.boundary.len()
        )));
    }
    let theta = rec.theta.interior.iter().chain(&rec.theta.boundary).map(|a| a.radians()).collect();
    let xi = rec.xi.iter().map(|a| a.radians()).collect();
    let data = AngleData { theta, xi };
    data.validate(&tri)?;
    Ok((tri, data))
}

pub(crate) fn problem_record(tri: &GluedTriangulation, data: &AngleData) -> ProblemRecord {
    let g = tri.interior_edge_count();
    ProblemRecord {
        triangles: tri.triangle_count(),
        gluings: tri.gluings().iter().map(GluingRecord::from_gluing).collect(),
        theta: ThetaRecord {
            interior: data.theta[..g].iter().map(|&v| Angle::Value(v)).collect(),
            boundary: data.theta[g..].iter().map(|&v| Angle::Value(v)).collect(),
        },
        xi: data.xi.iter().map(|&v| Angle::Value(v)).collect(),
    }
}

/// Serializes a problem instance in the problem-file schema.
pub fn problem_to_json(tri: &GluedTriangulation, data: &AngleData) -> String {
    crate::io::to_json_string(&problem_record(tri, data))
}
