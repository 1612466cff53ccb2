//! Linear constraints on per-triangle angles and the search for a strictly
//! feasible point.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::energy::TetAngles;
use crate::linalg;
use crate::lp::{self, LpError, LpOutcome, SimplexOptions, StandardLp};
use crate::surface::{AngleData, Corner, Edge, GluedTriangulation, Side};

/// Equalities must hold to this absolute tolerance, strict inequalities need
/// at least this much slack.
pub const COHERENCE_TOL: f64 = 1e-10;

/// Optimal slack of the max-slack program at or below this means the open
/// polytope is empty.
pub const SLACK_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherentError {
    #[error("angle system has {got} entries, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error("max-slack program is unbounded")]
    Unbounded,
}

/// Six angles per triangle: `x[6t + s]` is `α` of side `s`, `x[6t + 3 + c]`
/// is `γ` at corner `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSystem {
    values: Vec<f64>,
}

impl AngleSystem {
    pub fn from_vec(values: Vec<f64>) -> Self {
        assert!(values.len() % 6 == 0, "angle system length must be a multiple of 6");
        Self { values }
    }

    pub fn from_tets(tets: &[TetAngles<f64>]) -> Self {
        Self { values: tets.iter().flat_map(|t| t.to_array()).collect() }
    }

    pub fn triangle_count(&self) -> usize {
        self.values.len() / 6
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn alpha(&self, side: Side) -> f64 {
        self.values[alpha_index(side)]
    }

    pub fn gamma(&self, corner: Corner) -> f64 {
        self.values[gamma_index(corner)]
    }

    /// Angles of triangle `t` in tetrahedron order.
    pub fn tet(&self, t: usize) -> TetAngles<f64> {
        let mut a = [0.0; 6];
        a.copy_from_slice(&self.values[6 * t..6 * t + 6]);
        TetAngles::from_array(a)
    }

    pub fn tets(&self) -> impl Iterator<Item = TetAngles<f64>> + '_ {
        (0..self.triangle_count()).map(|t| self.tet(t))
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }

    pub fn max_abs_diff(&self, other: &AngleSystem) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

pub fn alpha_index(side: Side) -> usize {
    6 * side.triangle + side.side
}

pub fn gamma_index(corner: Corner) -> usize {
    6 * corner.triangle + 3 + corner.corner
}

/// What a constraint row expresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    TriangleSum(usize),
    InteriorEdge(usize),
    BoundaryEdge(usize),
    VertexSum(usize),
    AlphaPositive(Side),
    GammaPositive(Corner),
    /// `γ_i + α_ij + α_ki < π` at a corner.
    CornerBound(Corner),
}

impl fmt::Display for RowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowLabel::TriangleSum(t) => write!(f, "gamma sum of triangle {t}"),
            RowLabel::InteriorEdge(e) => write!(f, "alpha sum at interior edge {e}"),
            RowLabel::BoundaryEdge(e) => write!(f, "alpha at boundary edge {e}"),
            RowLabel::VertexSum(v) => write!(f, "gamma sum at vertex {v}"),
            RowLabel::AlphaPositive(s) => write!(f, "positivity of alpha at {s}"),
            RowLabel::GammaPositive(c) => write!(f, "positivity of gamma at {c}"),
            RowLabel::CornerBound(c) => write!(f, "gamma + alpha + alpha < pi at {c}"),
        }
    }
}

/// `eq · x = eq_rhs` and `ineq · x < ineq_rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub eq: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub eq_labels: Vec<RowLabel>,
    pub ineq: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
    pub ineq_labels: Vec<RowLabel>,
}

impl ConstraintSystem {
    pub fn dim(&self) -> usize {
        self.eq.ncols()
    }

    pub fn eq_rank(&self) -> usize {
        linalg::rank(&self.eq, linalg::RANK_TOL)
    }

    /// Same constraints with rows reordered: `eq_perm[k]` is the old index of
    /// new equality row `k`, likewise for `ineq_perm`.
    pub fn permuted_rows(&self, eq_perm: &[usize], ineq_perm: &[usize]) -> Self {
        let eq = DMatrix::from_fn(self.eq.nrows(), self.dim(), |i, j| self.eq[(eq_perm[i], j)]);
        let ineq = DMatrix::from_fn(self.ineq.nrows(), self.dim(), |i, j| self.ineq[(ineq_perm[i], j)]);
        Self {
            eq,
            eq_rhs: DVector::from_fn(eq_perm.len(), |i, _| self.eq_rhs[eq_perm[i]]),
            eq_labels: eq_perm.iter().map(|&i| self.eq_labels[i]).collect(),
            ineq,
            ineq_rhs: DVector::from_fn(ineq_perm.len(), |i, _| self.ineq_rhs[ineq_perm[i]]),
            ineq_labels: ineq_perm.iter().map(|&i| self.ineq_labels[i]).collect(),
        }
    }
}

/// Assembles the coherence constraints for a validated instance.
pub fn build_constraints(tri: &GluedTriangulation, data: &AngleData) -> ConstraintSystem {
    let n = 6 * tri.triangle_count();
    let mut eq_rows: Vec<(Vec<(usize, f64)>, f64, RowLabel)> = Vec::new();
    for t in 0..tri.triangle_count() {
        let row = (0..3).map(|c| (gamma_index(Corner::new(t, c)), 1.0)).collect();
        eq_rows.push((row, PI, RowLabel::TriangleSum(t)));
    }
    let interior = tri.edges().iter().enumerate().filter(|(_, e)| e.is_interior());
    for (e, edge) in interior {
        if let Edge::Interior { a, b, .. } = *edge {
            let row = vec![(alpha_index(a), 1.0), (alpha_index(b), 1.0)];
            eq_rows.push((row, PI - data.theta[e], RowLabel::InteriorEdge(e)));
        }
    }
    for (e, edge) in tri.edges().iter().enumerate() {
        if let Edge::Boundary { side } = *edge {
            eq_rows.push((vec![(alpha_index(side), 1.0)], PI - data.theta[e], RowLabel::BoundaryEdge(e)));
        }
    }
    for (v, corners) in tri.vertices().iter().enumerate() {
        let row = corners.iter().map(|&c| (gamma_index(c), 1.0)).collect();
        eq_rows.push((row, data.xi[v], RowLabel::VertexSum(v)));
    }

    let mut ineq_rows: Vec<(Vec<(usize, f64)>, f64, RowLabel)> = Vec::new();
    for t in 0..tri.triangle_count() {
        for s in 0..3 {
            let side = Side::new(t, s);
            ineq_rows.push((vec![(alpha_index(side), -1.0)], 0.0, RowLabel::AlphaPositive(side)));
        }
        for c in 0..3 {
            let corner = Corner::new(t, c);
            ineq_rows.push((vec![(gamma_index(corner), -1.0)], 0.0, RowLabel::GammaPositive(corner)));
        }
    }
    for t in 0..tri.triangle_count() {
        for c in 0..3 {
            let corner = Corner::new(t, c);
            let row = vec![
                (gamma_index(corner), 1.0),
                (alpha_index(Side::new(t, c)), 1.0),
                (alpha_index(Side::new(t, (c + 2) % 3)), 1.0),
            ];
            ineq_rows.push((row, PI, RowLabel::CornerBound(corner)));
        }
    }

    let dense = |rows: &[(Vec<(usize, f64)>, f64, RowLabel)]| {
        let mut m = DMatrix::zeros(rows.len(), n);
        for (i, (row, _, _)) in rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        (m, DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1)), rows.iter().map(|r| r.2).collect())
    };
    let (eq, eq_rhs, eq_labels) = dense(&eq_rows);
    let (ineq, ineq_rhs, ineq_labels) = dense(&ineq_rows);
    ConstraintSystem { eq, eq_rhs, eq_labels, ineq, ineq_rhs, ineq_labels }
}

/// Residuals of every constraint at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    pub coherent: bool,
    /// `eq · x − eq_rhs`, row by row.
    pub eq_residuals: Vec<f64>,
    /// `ineq_rhs − ineq · x`, row by row.
    pub slacks: Vec<f64>,
    pub max_eq_residual: f64,
    pub min_slack: f64,
    /// Rows that fail, with their residual or slack.
    pub failures: Vec<(RowLabel, f64)>,
}

pub fn is_coherent(x: &AngleSystem, cs: &ConstraintSystem) -> Result<CoherenceReport, CoherentError> {
    if x.len() != cs.dim() {
        return Err(CoherentError::Dimension { expected: cs.dim(), got: x.len() });
    }
    let v = x.to_dvector();
    let eq_residuals: Vec<f64> = (&cs.eq * &v - &cs.eq_rhs).iter().copied().collect();
    let slacks: Vec<f64> = (&cs.ineq_rhs - &cs.ineq * &v).iter().copied().collect();
    let mut failures = Vec::new();
    for (r, l) in eq_residuals.iter().zip(&cs.eq_labels) {
        if !(r.abs() <= COHERENCE_TOL) {
            failures.push((*l, *r));
        }
    }
    for (s, l) in slacks.iter().zip(&cs.ineq_labels) {
        if !(*s > COHERENCE_TOL) {
            failures.push((*l, *s));
        }
    }
    Ok(CoherenceReport {
        coherent: failures.is_empty(),
        max_eq_residual: eq_residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
        min_slack: slacks.iter().copied().fold(f64::INFINITY, f64::min),
        eq_residuals,
        slacks,
        failures,
    })
}

/// Evidence that no strictly coherent angle system exists.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Optimal value of the max-slack program, `None` when even the
    /// equalities together with the relaxed inequalities are inconsistent.
    pub max_slack: Option<f64>,
    /// Multipliers of the equality rows followed by those of the inequality
    /// rows, from the final simplex tableau.
    pub duals: Vec<f64>,
    /// Phase-one infeasibility when `max_slack` is `None`.
    pub phase_one_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible { x: AngleSystem, slack: f64 },
    Infeasible(Certificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Lower bound on the slack variable of the max-slack program. Only the sign
/// of the optimum matters for the verdict; the bound keeps the program
/// bounded while leaving room to report how badly an instance fails.
const SLACK_FLOOR: f64 = 2.0 * PI;

/// Maximizes the common slack `s` of all strict inequalities subject to the
/// equalities. With `x' = x + K`, `s' = s + K ∈ [0, K + 1]` (`K` the slack
/// floor) the program is in standard form with one slack variable per
/// inequality and one for the cap. Positivity rows give `x ≥ s ≥ −K`, so the
/// shift loses nothing.
pub fn find_coherent(cs: &ConstraintSystem) -> Result<Feasibility, CoherentError> {
    find_coherent_with(cs, &SimplexOptions::default())
}

pub fn find_coherent_with(cs: &ConstraintSystem, opts: &SimplexOptions) -> Result<Feasibility, CoherentError> {
    let n = cs.dim();
    let me = cs.eq.nrows();
    let mi = cs.ineq.nrows();
    let cols = n + 1 + mi + 1;
    let s_col = n;
    let mut a = Vec::with_capacity(me + mi + 1);
    let mut b = Vec::with_capacity(me + mi + 1);
    for i in 0..me {
        let mut row = vec![0.0; cols];
        let mut shift = 0.0;
        for j in 0..n {
            row[j] = cs.eq[(i, j)];
            shift += SLACK_FLOOR * cs.eq[(i, j)];
        }
        a.push(row);
        b.push(cs.eq_rhs[i] + shift);
    }
    for i in 0..mi {
        let mut row = vec![0.0; cols];
        let mut shift = 0.0;
        for j in 0..n {
            row[j] = cs.ineq[(i, j)];
            shift += SLACK_FLOOR * cs.ineq[(i, j)];
        }
        row[s_col] = 1.0;
        row[n + 1 + i] = 1.0;
        a.push(row);
        b.push(cs.ineq_rhs[i] + shift + SLACK_FLOOR);
    }
    let mut cap = vec![0.0; cols];
    cap[s_col] = 1.0;
    cap[cols - 1] = 1.0;
    a.push(cap);
    b.push(SLACK_FLOOR + 1.0);
    let mut c = vec![0.0; cols];
    c[s_col] = -1.0;

    match lp::solve(&StandardLp { a, b, c }, opts)? {
        LpOutcome::Optimal { z, duals, .. } => {
            let slack = z[s_col] - SLACK_FLOOR;
            if slack > SLACK_THRESHOLD {
                let x = AngleSystem::from_vec(z[..n].iter().map(|v| v - SLACK_FLOOR).collect());
                Ok(Feasibility::Feasible { x, slack })
            } else {
                Ok(Feasibility::Infeasible(Certificate {
                    max_slack: Some(slack),
                    duals: duals[..me + mi].to_vec(),
                    phase_one_value: None,
                }))
            }
        }
        LpOutcome::Infeasible { phase_one_value, farkas } => Ok(Feasibility::Infeasible(Certificate {
            max_slack: None,
            duals: farkas[..me + mi].to_vec(),
            phase_one_value: Some(phase_one_value),
        })),
        LpOutcome::Unbounded => Err(CoherentError::Unbounded),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Gluing;

    fn torus() -> GluedTriangulation {
        GluedTriangulation::new(
            2,
            vec![
                Gluing::new(Side::new(0, 0), Side::new(1, 0)),
                Gluing::new(Side::new(0, 1), Side::new(1, 1)),
                Gluing::new(Side::new(0, 2), Side::new(1, 2)),
            ],
        )
        .unwrap()
    }

    fn symmetric(tri: &GluedTriangulation, theta: f64) -> AngleSystem {
        let a = (PI - theta) / 2.0;
        let tet = TetAngles::new([a; 3], [PI / 3.0; 3]);
        AngleSystem::from_tets(&vec![tet; tri.triangle_count()])
    }

    #[test]
    fn row_counts() {
        let single = GluedTriangulation::new(1, vec![]).unwrap();
        let data = AngleData { theta: vec![1.0; 3], xi: vec![1.0; 3] };
        let cs = build_constraints(&single, &data);
        assert_eq!((cs.eq.nrows(), cs.dim(), cs.ineq.nrows()), (7, 6, 9));

        let t = torus();
        let data = AngleData { theta: vec![PI / 2.0; 3], xi: vec![2.0 * PI] };
        let cs = build_constraints(&t, &data);
        assert_eq!((cs.eq.nrows(), cs.dim(), cs.ineq.nrows()), (6, 12, 18));
        // One relation: the vertex row equals the sum of the triangle rows.
        assert_eq!(cs.eq_rank(), 5);

        let disk = GluedTriangulation::from_faces(&[[0, 1, 2], [2, 1, 3]]).unwrap();
        let data = AngleData { theta: vec![1.0; 5], xi: vec![1.0; 4] };
        assert_eq!(build_constraints(&disk, &data).eq.nrows(), 11);
    }

    #[test]
    fn torus_symmetric_point() {
        let t = torus();
        let data = AngleData { theta: vec![PI / 2.0; 3], xi: vec![2.0 * PI] };
        let rep = is_coherent(&symmetric(&t, PI / 2.0), &build_constraints(&t, &data)).unwrap();
        assert!(rep.coherent, "{:?}", rep.failures);

        let data = AngleData { theta: vec![PI / 3.0; 3], xi: vec![2.0 * PI] };
        let rep = is_coherent(&symmetric(&t, PI / 3.0), &build_constraints(&t, &data)).unwrap();
        assert!(!rep.coherent);
        assert!(rep.failures.iter().all(|(l, _)| matches!(l, RowLabel::CornerBound(_))));
        assert!(rep.min_slack.abs() < 1e-12);
    }

    #[test]
    fn negative_gamma_is_named() {
        let t = torus();
        let data = AngleData { theta: vec![PI / 2.0; 3], xi: vec![2.0 * PI] };
        let mut x = symmetric(&t, PI / 2.0);
        x.as_mut_slice()[gamma_index(Corner::new(1, 2))] = -0.1;
        let rep = is_coherent(&x, &build_constraints(&t, &data)).unwrap();
        assert!(rep.failures.iter().any(|(l, _)| *l == RowLabel::GammaPositive(Corner::new(1, 2))));
    }

    #[test]
    fn single_triangle_verdicts() {
        let single = GluedTriangulation::new(1, vec![]).unwrap();
        let data = AngleData { theta: vec![5.0 * PI / 6.0; 3], xi: vec![PI / 3.0; 3] };
        match find_coherent(&build_constraints(&single, &data)).unwrap() {
            Feasibility::Feasible { x, slack } => {
                let t = x.tet(0);
                for k in 0..3 {
                    assert!((t.alpha[k] - PI / 6.0).abs() < 1e-12);
                    assert!((t.gamma[k] - PI / 3.0).abs() < 1e-12);
                }
                assert!((slack - PI / 6.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let data = AngleData { theta: vec![PI / 2.0; 3], xi: vec![PI / 3.0; 3] };
        let f = find_coherent(&build_constraints(&single, &data)).unwrap();
        match f {
            Feasibility::Infeasible(cert) => assert!((cert.max_slack.unwrap() + PI / 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn torus_is_feasible() {
        let t = torus();
        let data = AngleData { theta: vec![PI / 2.0; 3], xi: vec![2.0 * PI] };
        let cs = build_constraints(&t, &data);
        let Feasibility::Feasible { x, .. } = find_coherent(&cs).unwrap() else { panic!() };
        assert!(is_coherent(&x, &cs).unwrap().coherent);
    }

    #[test]
    fn inconsistent_equalities_fail_in_phase_one() {
        let t = torus();
        let data = AngleData { theta: vec![PI / 2.0; 3], xi: vec![PI] };
        match find_coherent(&build_constraints(&t, &data)).unwrap() {
            Feasibility::Infeasible(c) => assert!(c.phase_one_value.unwrap() > 0.0),
            other => panic!("{other:?}"),
        }
    }
}
