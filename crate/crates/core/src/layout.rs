//! Planar placement of decorated triangles, SVG and JSON export.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geom::{self, Circle, Isometry, Point};
use crate::pattern::{DecoratedMetric, PatternError};
use crate::surface::{Corner, Edge, GluedTriangulation, Side};

/// Cone angles within this of 2π count as flat.
pub const FLAT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutMode {
    Global,
    Atlas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedTriangle {
    /// Positions of corners 0, 1, 2.
    pub vertices: [Point; 3],
    pub face_circle: Circle,
    pub radii: [f64; 3],
}

/// Rigid motion taking the placement of `from` onto the placement abutting
/// `to` across `edge`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub edge: usize,
    pub from: usize,
    pub to: usize,
    pub isometry: Isometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartLayout {
    pub mode: LayoutMode,
    pub triangles: Vec<PlacedTriangle>,
    pub transitions: Vec<Transition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Longest side on the positive x-axis starting at the origin, third
/// vertex above; ties go to the lower side index.
pub fn canonical_placement(l: [f64; 3]) -> [Point; 3] {
    let mut k = 0;
    for s in 1..3 {
        if l[s] > l[k] {
            k = s;
        }
    }
    let p = geom::place_triangle([l[k], l[(k + 1) % 3], l[(k + 2) % 3]]);
    let mut out = [[0.0; 2]; 3];
    for i in 0..3 {
        out[(k + i) % 3] = p[i];
    }
    out
}

/// Motion taking `q` (placement of the triangle of `b`) next to `p`
/// (placement of the triangle of `a`) so that sides `a` and `b` coincide.
fn align_across(p: &[Point; 3], a: Side, q: &[Point; 3], b: Side) -> Isometry {
    Isometry::aligning(q[(b.side + 1) % 3], q[b.side], p[a.side], p[(a.side + 1) % 3])
}

fn cone_angles(tri: &GluedTriangulation, dm: &DecoratedMetric) -> Vec<f64> {
    let angles: Vec<[f64; 3]> =
        (0..tri.triangle_count()).map(|t| geom::triangle_angles(dm.triangle_lengths(tri, t))).collect();
    tri.vertices().iter().map(|cs| cs.iter().map(|c| angles[c.triangle][c.corner]).sum()).collect()
}

pub fn lay_out(tri: &GluedTriangulation, dm: &DecoratedMetric) -> Result<ChartLayout, PatternError> {
    dm.validate(tri)?;
    let n = tri.triangle_count();
    let xi = cone_angles(tri, dm);
    let flat = (0..tri.vertex_count()).all(|v| tri.is_boundary_vertex(v) || (xi[v] - 2.0 * PI).abs() <= FLAT_TOL);
    let mode = if tri.is_disk() && flat { LayoutMode::Global } else { LayoutMode::Atlas };

    let canonical: Vec<[Point; 3]> = (0..n).map(|t| canonical_placement(dm.triangle_lengths(tri, t))).collect();
    let mut placed = canonical.clone();
    if mode == LayoutMode::Global {
        let mut done = vec![false; n];
        done[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(t) = queue.pop_front() {
            for s in 0..3 {
                let a = Side::new(t, s);
                if let Some(b) = tri.partner(a) {
                    if !done[b.triangle] {
                        let m = align_across(&placed[t], a, &canonical[b.triangle], b);
                        placed[b.triangle] = canonical[b.triangle].map(|v| m.apply(v));
                        done[b.triangle] = true;
                        queue.push_back(b.triangle);
                    }
                }
            }
        }
    }

    let mut triangles = Vec::with_capacity(n);
    for (t, p) in placed.iter().enumerate() {
        let radii = dm.triangle_radii(tri, t);
        let (center, power) = geom::radical_center(*p, radii);
        if !(power > 0.0) {
            return Err(PatternError::NoOrthocircle { triangle: t, power });
        }
        triangles.push(PlacedTriangle { vertices: *p, face_circle: Circle { center, radius: power.sqrt() }, radii });
    }

    let mut transitions = Vec::new();
    for (e, edge) in tri.edges().iter().enumerate() {
        if let Edge::Interior { a, b, .. } = *edge {
            let isometry = align_across(&placed[a.triangle], a, &placed[b.triangle], b);
            transitions.push(Transition { edge: e, from: b.triangle, to: a.triangle, isometry });
        }
    }

    let mut warnings = Vec::new();
    if mode == LayoutMode::Global {
        if let Some((s, t)) = first_overlap(&placed) {
            warnings.push(format!("triangles {s} and {t} overlap in the global layout"));
        }
    }
    Ok(ChartLayout { mode, triangles, transitions, warnings })
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    let u = geom::sub(b, a);
    let v = geom::sub(c, a);
    u[0] * v[1] - u[1] * v[0]
}

fn segments_cross(p: Point, q: Point, r: Point, s: Point) -> bool {
    let scale = geom::dist(p, q).max(geom::dist(r, s));
    let eps = 1e-9 * scale * scale;
    let d1 = orient(p, q, r);
    let d2 = orient(p, q, s);
    let d3 = orient(r, s, p);
    let d4 = orient(r, s, q);
    (d1 > eps && d2 < -eps || d1 < -eps && d2 > eps) && (d3 > eps && d4 < -eps || d3 < -eps && d4 > eps)
}

fn contains(t: &[Point; 3], p: Point) -> bool {
    (0..3).all(|i| orient(t[i], t[(i + 1) % 3], p) > 0.0)
}

fn first_overlap(placed: &[[Point; 3]]) -> Option<(usize, usize)> {
    if placed.len() > 2000 {
        return None;
    }
    for s in 0..placed.len() {
        for t in s + 1..placed.len() {
            let (a, b) = (&placed[s], &placed[t]);
            let centroid = |x: &[Point; 3]| [(x[0][0] + x[1][0] + x[2][0]) / 3.0, (x[0][1] + x[1][1] + x[2][1]) / 3.0];
            if contains(a, centroid(b)) || contains(b, centroid(a)) {
                return Some((s, t));
            }
            for i in 0..3 {
                for j in 0..3 {
                    if segments_cross(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                        return Some((s, t));
                    }
                }
            }
        }
    }
    None
}

impl ChartLayout {
    /// Motion taking the chart of the triangle across `side` into the chart
    /// of `side.triangle`.
    pub fn transition_across(&self, tri: &GluedTriangulation, side: Side) -> Option<Isometry> {
        let e = tri.edge_of(side);
        let tr = self.transitions.iter().find(|t| t.edge == e)?;
        let Edge::Interior { a, .. } = tri.edges()[e] else { return None };
        Some(if a == side { tr.isometry } else { tr.isometry.inverse() })
    }

    /// Composition of transitions once around the vertex at `corner`,
    /// expressed in the chart of `corner.triangle`.
    pub fn holonomy(&self, tri: &GluedTriangulation, corner: Corner) -> Option<Isometry> {
        let cycle = tri.corner_cycle(corner)?;
        let mut m = Isometry::identity();
        for (_, side) in cycle {
            m = m.compose(&self.transition_across(tri, side)?);
        }
        Some(m)
    }
}

/// Rotation angle reduced to `(−π, π]`.
pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Drawing units per unit length.
    pub scale: f64,
    pub margin: f64,
    pub stroke_width: f64,
    pub face_circles: bool,
    pub vertex_circles: bool,
    pub labels: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { scale: 200.0, margin: 20.0, stroke_width: 1.0, face_circles: true, vertex_circles: true, labels: true }
    }
}

/// Decimal with nine significant digits and trailing zeros removed.
pub fn fmt9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (8 - exp).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

struct Frame {
    min: Point,
    max: Point,
}

fn bounds(tris: &[&PlacedTriangle], opts: &SvgOptions) -> Frame {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    let mut grow = |c: Point, r: f64| {
        for k in 0..2 {
            min[k] = min[k].min(c[k] - r);
            max[k] = max[k].max(c[k] + r);
        }
    };
    for t in tris {
        for (v, r) in t.vertices.iter().zip(t.radii) {
            grow(*v, if opts.vertex_circles { r } else { 0.0 });
        }
        if opts.face_circles {
            grow(t.face_circle.center, t.face_circle.radius);
        }
    }
    Frame { min, max }
}

fn draw_triangle(out: &mut String, t: &PlacedTriangle, map: &dyn Fn(Point) -> Point, opts: &SvgOptions) {
    let p = t.vertices.map(map);
    let _ = writeln!(
        out,
        r#"<path d="M {} {} L {} {} L {} {} Z" fill="none" stroke="black" stroke-width="{}"/>"#,
        fmt9(p[0][0]),
        fmt9(p[0][1]),
        fmt9(p[1][0]),
        fmt9(p[1][1]),
        fmt9(p[2][0]),
        fmt9(p[2][1]),
        fmt9(opts.stroke_width)
    );
    if opts.vertex_circles {
        for (c, r) in p.iter().zip(t.radii) {
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="steelblue" stroke-width="{}"/>"#,
                fmt9(c[0]),
                fmt9(c[1]),
                fmt9(r * opts.scale),
                fmt9(opts.stroke_width)
            );
        }
    }
    if opts.face_circles {
        let c = map(t.face_circle.center);
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="firebrick" stroke-width="{}" stroke-dasharray="4 2"/>"#,
            fmt9(c[0]),
            fmt9(c[1]),
            fmt9(t.face_circle.radius * opts.scale),
            fmt9(opts.stroke_width)
        );
    }
}

pub fn export_svg(cl: &ChartLayout, opts: &SvgOptions) -> String {
    let s = opts.scale;
    let mut body = String::new();
    let (width, height);
    match cl.mode {
        LayoutMode::Global => {
            let all: Vec<&PlacedTriangle> = cl.triangles.iter().collect();
            let f = bounds(&all, opts);
            let map = |p: Point| [(p[0] - f.min[0]) * s + opts.margin, (f.max[1] - p[1]) * s + opts.margin];
            body.push_str("<g class=\"layout\">\n");
            for t in &cl.triangles {
                draw_triangle(&mut body, t, &map, opts);
            }
            body.push_str("</g>\n");
            width = (f.max[0] - f.min[0]) * s + 2.0 * opts.margin;
            height = (f.max[1] - f.min[1]) * s + 2.0 * opts.margin;
        }
        LayoutMode::Atlas => {
            let frames: Vec<Frame> = cl.triangles.iter().map(|t| bounds(&[t], opts)).collect();
            let cell_w = frames.iter().map(|f| f.max[0] - f.min[0]).fold(0.0, f64::max) * s + 2.0 * opts.margin;
            let cell_h = frames.iter().map(|f| f.max[1] - f.min[1]).fold(0.0, f64::max) * s + 2.0 * opts.margin;
            let cols = (cl.triangles.len() as f64).sqrt().ceil().max(1.0) as usize;
            let rows = cl.triangles.len().div_ceil(cols);
            for (t, (tri, f)) in cl.triangles.iter().zip(&frames).enumerate() {
                let ox = (t % cols) as f64 * cell_w + opts.margin;
                let oy = (t / cols) as f64 * cell_h + opts.margin;
                let map = |p: Point| [(p[0] - f.min[0]) * s + ox, (f.max[1] - p[1]) * s + oy];
                let _ = writeln!(body, "<g class=\"chart\" id=\"chart-{t}\">");
                draw_triangle(&mut body, tri, &map, opts);
                if opts.labels {
                    let c = map(tri.face_circle.center);
                    let _ = writeln!(
                        body,
                        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">t{t}</text>"#,
                        fmt9(c[0]),
                        fmt9(c[1])
                    );
                    for tr in cl.transitions.iter().filter(|tr| tr.to == t || tr.from == t) {
                        let other = if tr.to == t { tr.from } else { tr.to };
                        let _ = writeln!(
                            body,
                            r#"<text x="{}" y="{}" font-size="10">e{}: t{} rot {}</text>"#,
                            fmt9(ox),
                            fmt9(oy + cell_h - 2.0 * opts.margin + 12.0 * (tr.edge % 3) as f64),
                            tr.edge,
                            other,
                            fmt9(reduce_angle(tr.isometry.rotation))
                        );
                    }
                }
                body.push_str("</g>\n");
            }
            width = cols as f64 * cell_w + 2.0 * opts.margin;
            height = rows as f64 * cell_h + 2.0 * opts.margin;
        }
    }
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n{}</svg>\n",
        fmt9(width),
        fmt9(height),
        fmt9(width),
        fmt9(height),
        body
    )
}

pub fn layout_to_json(cl: &ChartLayout) -> String {
    crate::io::to_json_string(cl)
}

pub fn parse_layout(text: &str) -> Result<ChartLayout, serde_json::Error> {
    serde_json::from_str(text)
}
