//! Maximization of the total truncated volume over the coherent polytope.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coherent::{
    alpha_index, build_constraints, find_coherent, gamma_index, is_coherent, AngleSystem, Certificate,
    CoherentError, ConstraintSystem, Feasibility, RowLabel,
};
use crate::energy::{tet_volume, tet_volume_grad, tet_volume_hess, EnergyError};
use crate::linalg;
use crate::surface::{AngleData, Corner, Edge, GluedTriangulation};

/// Reduced Newton systems with a larger condition number fall back to a
/// gradient step.
pub const MAX_NEWTON_CONDITION: f64 = 1e12;
const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
/// Fraction of each inequality slack that a single step may consume.
const SLACK_KEEP: f64 = 1e-2;
const MAX_HALVINGS: usize = 80;
/// Edges with `θ = 0` whose angle drops below this get a flip diagnostic.
pub const FLIP_ALPHA: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("starting point is not coherent: {}", describe(.0))]
    NotCoherent(Vec<(RowLabel, f64)>),
    #[error("no strictly coherent angle system exists")]
    Infeasible(Certificate),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Coherent(#[from] CoherentError),
}

fn describe(rows: &[(RowLabel, f64)]) -> String {
    let mut parts: Vec<String> = rows.iter().take(5).map(|(l, v)| format!("{l} ({v:.3e})")).collect();
    if rows.len() > 5 {
        parts.push(format!("and {} more", rows.len() - 5));
    }
    parts.join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Bound on the ∞-norm of the projected gradient.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    /// The line search found no admissible ascent step.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub min_slack: f64,
    /// Largest `|∂F/∂α^t − ∂F/∂α^t′|` over interior edges.
    pub compat_edge: f64,
    /// Largest gradient sum around a fundamental vertex–triangle cycle.
    pub compat_cycle: f64,
    /// Objective value at every iterate.
    pub history: Vec<f64>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

/// `F = Σ_t V(t)`.
pub fn objective_f(x: &AngleSystem) -> Result<f64, EnergyError> {
    x.tets().map(|t| tet_volume(&t)).sum()
}

pub fn objective_grad(x: &AngleSystem) -> Result<DVector<f64>, EnergyError> {
    let mut g = DVector::zeros(x.len());
    for (t, tet) in x.tets().enumerate() {
        let gt = tet_volume_grad(&tet)?;
        g.rows_mut(6 * t, 6).copy_from_slice(&gt);
    }
    Ok(g)
}

/// Block-diagonal Hessian of `F`.
pub fn objective_hess(x: &AngleSystem) -> Result<DMatrix<f64>, EnergyError> {
    let mut h = DMatrix::zeros(x.len(), x.len());
    for (t, tet) in x.tets().enumerate() {
        let ht = tet_volume_hess(&tet)?;
        for i in 0..6 {
            for j in 0..6 {
                h[(6 * t + i, 6 * t + j)] = ht[i][j];
            }
        }
    }
    Ok(h)
}

/// Vertex potentials `a_v` with `a_v + 2 ∂F/∂γ^t_v` constant on each
/// triangle, integrated along a breadth-first spanning tree of the
/// vertex–triangle incidence graph. The first vertex of every component is
/// the gauge (`a = 0`). Also returns the largest off-tree mismatch and
/// whether every vertex was reached from vertex 0.
pub(crate) fn vertex_potentials(tri: &GluedTriangulation, grad: &[f64]) -> (Vec<f64>, f64, bool) {
    let nv = tri.vertex_count();
    let nt = tri.triangle_count();
    let mut a = vec![f64::NAN; nv];
    let mut c = vec![f64::NAN; nt];
    let mut tree = vec![false; 3 * nt];
    let mut connected = true;
    for root in 0..nv {
        if !a[root].is_nan() {
            continue;
        }
        if root > 0 {
            connected = false;
        }
        a[root] = 0.0;
        let mut queue = VecDeque::from([Node::Vertex(root)]);
        while let Some(node) = queue.pop_front() {
            match node {
                Node::Vertex(v) => {
                    for &k in &tri.vertices()[v] {
                        if c[k.triangle].is_nan() {
                            c[k.triangle] = a[v] + 2.0 * grad[gamma_index(k)];
                            tree[3 * k.triangle + k.corner] = true;
                            queue.push_back(Node::Triangle(k.triangle));
                        }
                    }
                }
                Node::Triangle(t) => {
                    for corner in 0..3 {
                        let k = Corner::new(t, corner);
                        let v = tri.vertex_of(k);
                        if a[v].is_nan() {
                            a[v] = c[t] - 2.0 * grad[gamma_index(k)];
                            tree[3 * t + corner] = true;
                            queue.push_back(Node::Vertex(v));
                        }
                    }
                }
            }
        }
    }
    let mut residual: f64 = 0.0;
    for t in 0..nt {
        for corner in 0..3 {
            if !tree[3 * t + corner] {
                let k = Corner::new(t, corner);
                let r = a[tri.vertex_of(k)] + 2.0 * grad[gamma_index(k)] - c[t];
                residual = residual.max(r.abs());
            }
        }
    }
    (a, residual, connected)
}

enum Node {
    Vertex(usize),
    Triangle(usize),
}

/// `(compat_edge, compat_cycle)` for a gradient of `F`.
pub fn compat_residuals(tri: &GluedTriangulation, grad: &[f64]) -> (f64, f64) {
    let mut edge: f64 = 0.0;
    for e in tri.edges() {
        if let Edge::Interior { a, b, .. } = *e {
            edge = edge.max((grad[alpha_index(a)] - grad[alpha_index(b)]).abs());
        }
    }
    let (_, cycle, _) = vertex_potentials(tri, grad);
    (edge, cycle / 2.0)
}

/// Spanning set of the tangent space of the coherent polytope built from
/// the combinatorics alone: one vector `e_α(t,s) − e_α(t′,s′)` per interior
/// edge, and one alternating γ-vector per fundamental cycle of the
/// vertex–triangle incidence graph. Columns are the generators.
pub fn tangent_generators(tri: &GluedTriangulation) -> DMatrix<f64> {
    let n = 6 * tri.triangle_count();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for e in tri.edges() {
        if let Edge::Interior { a, b, .. } = *e {
            let mut v = DVector::zeros(n);
            v[alpha_index(a)] = 1.0;
            v[alpha_index(b)] = -1.0;
            cols.push(v);
        }
    }
    // Each corner is an edge of the incidence graph; a non-tree corner closes
    // a cycle with the tree paths to its endpoints. Signed indicator chains
    // are obtained by differencing potentials of unit chains.
    let nv = tri.vertex_count();
    let nt = tri.triangle_count();
    let mut parent_v: Vec<Option<Corner>> = vec![None; nv];
    let mut parent_t: Vec<Option<Corner>> = vec![None; nt];
    let mut seen_v = vec![false; nv];
    let mut seen_t = vec![false; nt];
    let mut tree = vec![false; 3 * nt];
    for root in 0..nv {
        if seen_v[root] {
            continue;
        }
        seen_v[root] = true;
        let mut queue = VecDeque::from([Node::Vertex(root)]);
        while let Some(node) = queue.pop_front() {
            match node {
                Node::Vertex(v) => {
                    for &k in &tri.vertices()[v] {
                        if !seen_t[k.triangle] {
                            seen_t[k.triangle] = true;
                            parent_t[k.triangle] = Some(k);
                            tree[3 * k.triangle + k.corner] = true;
                            queue.push_back(Node::Triangle(k.triangle));
                        }
                    }
                }
                Node::Triangle(t) => {
                    for corner in 0..3 {
                        let k = Corner::new(t, corner);
                        let v = tri.vertex_of(k);
                        if !seen_v[v] {
                            seen_v[v] = true;
                            parent_v[v] = Some(k);
                            tree[3 * t + corner] = true;
                            queue.push_back(Node::Vertex(v));
                        }
                    }
                }
            }
        }
    }
    // Path from a node up to its root as a signed chain: orientation is
    // vertex → triangle = +1 on γ.
    let path_from_vertex = |mut v: usize, chain: &mut DVector<f64>, sign: f64| {
        while let Some(k) = parent_v[v] {
            // Edge traversed triangle → vertex going down, vertex → triangle going up.
            chain[gamma_index(k)] += sign;
            let t = k.triangle;
            let pk = parent_t[t].expect("triangles always have a parent corner");
            chain[gamma_index(pk)] -= sign;
            v = tri.vertex_of(pk);
        }
    };
    for t in 0..nt {
        for corner in 0..3 {
            if tree[3 * t + corner] {
                continue;
            }
            let k = Corner::new(t, corner);
            // Cycle: v → t along k, back from t to its parent vertex, then
            // up the tree to the root and down again to v.
            let mut chain = DVector::zeros(n);
            chain[gamma_index(k)] += 1.0;
            let pk = parent_t[t].expect("reached triangle");
            chain[gamma_index(pk)] -= 1.0;
            path_from_vertex(tri.vertex_of(pk), &mut chain, 1.0);
            path_from_vertex(tri.vertex_of(k), &mut chain, -1.0);
            cols.push(chain);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols)
}

fn min_slack(cs: &ConstraintSystem, x: &DVector<f64>) -> f64 {
    (&cs.ineq_rhs - &cs.ineq * x).iter().copied().fold(f64::INFINITY, f64::min)
}

/// Reduced Newton ascent from a strictly coherent `x0`.
pub fn maximize(
    tri: &GluedTriangulation,
    data: &AngleData,
    x0: &AngleSystem,
    opts: &SolveOptions,
) -> Result<(AngleSystem, SolveReport), SolveError> {
    let cs = build_constraints(tri, data);
    let rep = is_coherent(x0, &cs)?;
    if !rep.coherent {
        return Err(SolveError::NotCoherent(rep.failures));
    }
    let basis = linalg::null_space(&cs.eq, linalg::RANK_TOL).basis;
    let mut x = x0.to_dvector();
    let mut f = objective_f(x0)?;
    let mut history = vec![f];
    let mut iterations = 0;
    let (status, grad) = loop {
        let point = AngleSystem::from_vec(x.iter().copied().collect());
        let g = objective_grad(&point)?;
        if basis.ncols() == 0 {
            break (SolveStatus::Converged, g);
        }
        let gr = basis.tr_mul(&g);
        let norm = (&basis * &gr).amax();
        if norm <= opts.tol {
            break (SolveStatus::Converged, g);
        }
        if iterations >= opts.max_iters {
            break (SolveStatus::MaxIters, g);
        }
        iterations += 1;

        let h = objective_hess(&point)?;
        let neg_hr = -(basis.tr_mul(&h) * &basis);
        let dr = linalg::solve_spd(&neg_hr, &gr, MAX_NEWTON_CONDITION)
            .filter(|d| d.dot(&gr) > 0.0)
            .unwrap_or_else(|| gr.clone());
        let d = &basis * &dr;
        if d.amax() == 0.0 {
            break (SolveStatus::Converged, g);
        }
        let slope = gr.dot(&dr);

        let slacks = &cs.ineq_rhs - &cs.ineq * &x;
        let rates = &cs.ineq * &d;
        let mut t: f64 = 1.0;
        for (s, r) in slacks.iter().zip(rates.iter()) {
            if *r > 0.0 {
                t = t.min((1.0 - SLACK_KEEP) * s / r);
            }
        }

        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = &x + t * &d;
            let trial_pt = AngleSystem::from_vec(trial.iter().copied().collect());
            if let Ok(ft) = objective_f(&trial_pt) {
                let gain = ARMIJO_C * t * slope;
                let noise = 64.0 * f64::EPSILON * f.abs().max(1.0);
                let ok = if gain > noise {
                    ft >= f + gain
                } else {
                    // Increase is below rounding level: accept when the
                    // objective does not drop and the gradient shrinks.
                    ft >= f - noise
                        && objective_grad(&trial_pt)
                            .map(|gt| (&basis * basis.tr_mul(&gt)).amax() < norm)
                            .unwrap_or(false)
                };
                if ok {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= SHRINK;
        }
        match accepted {
            Some((trial, ft)) => {
                x = trial;
                f = ft;
                history.push(f);
            }
            None => break (SolveStatus::Stalled, g),
        }
    };

    let xs = AngleSystem::from_vec(x.iter().copied().collect());
    let grad_norm = if basis.ncols() == 0 { 0.0 } else { (&basis * basis.tr_mul(&grad)).amax() };
    let (compat_edge, compat_cycle) = compat_residuals(tri, grad.as_slice());
    let mut diagnostics = Vec::new();
    for (e, edge) in tri.edges().iter().enumerate() {
        if let Edge::Interior { a, b, .. } = *edge {
            if data.theta[e] == 0.0 && (xs.alpha(a) < FLIP_ALPHA || xs.alpha(b) < FLIP_ALPHA) {
                diagnostics.push(format!(
                    "edge {e}: coinciding face circles and alpha below {FLIP_ALPHA:e}; an edge flip is recommended"
                ));
            }
        }
    }
    let report = SolveReport {
        status,
        objective: f,
        grad_norm,
        iterations,
        min_slack: min_slack(&cs, &x),
        compat_edge,
        compat_cycle,
        history,
        diagnostics,
    };
    Ok((xs, report))
}

/// Finds a starting point and maximizes.
pub fn solve_problem(
    tri: &GluedTriangulation,
    data: &AngleData,
    opts: &SolveOptions,
) -> Result<(AngleSystem, SolveReport), SolveError> {
    match find_coherent(&build_constraints(tri, data))? {
        Feasibility::Feasible { x, .. } => maximize(tri, data, &x, opts),
        Feasibility::Infeasible(cert) => Err(SolveError::Infeasible(cert)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::TetAngles;
    use crate::surface::{Gluing, Side};
    use std::f64::consts::PI;

    fn torus() -> GluedTriangulation {
        GluedTriangulation::new(
            2,
            (0..3).map(|s| Gluing::new(Side::new(0, s), Side::new(1, s))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn symmetric_torus_objective() {
        let tet = TetAngles::new([PI / 4.0; 3], [PI / 3.0; 3]);
        let x = AngleSystem::from_tets(&[tet, tet]);
        let f = objective_f(&x).unwrap();
        assert!((f - 2.0 * tet_volume(&tet).unwrap()).abs() < 1e-15);
        let g = objective_grad(&x).unwrap();
        for k in 0..12 {
            let same = if k % 6 < 3 { g[0] } else { g[3] };
            assert!((g[k] - same).abs() < 1e-14);
        }
    }

    #[test]
    fn torus_converges_to_symmetric_point() {
        let tri = torus();
        let data = AngleData { theta: vec![PI / 2.0; 3], xi: vec![2.0 * PI] };
        let (x, rep) = solve_problem(&tri, &data, &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        for t in x.tets() {
            for k in 0..3 {
                assert!((t.alpha[k] - PI / 4.0).abs() < 1e-8);
                assert!((t.gamma[k] - PI / 3.0).abs() < 1e-8);
            }
        }
        assert!(rep.compat_edge < 1e-9 && rep.compat_cycle < 1e-9);
        assert!(rep.history.windows(2).all(|w| w[1] >= w[0] - 1e-13));
    }

    #[test]
    fn pinned_single_triangle_takes_no_steps() {
        let tri = GluedTriangulation::new(1, vec![]).unwrap();
        let data = AngleData { theta: vec![5.0 * PI / 6.0; 3], xi: vec![PI / 3.0; 3] };
        let (x, rep) = solve_problem(&tri, &data, &SolveOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!((x.tet(0).alpha[0] - PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn incoherent_start_is_rejected() {
        let tri = torus();
        let data = AngleData { theta: vec![PI / 2.0; 3], xi: vec![2.0 * PI] };
        let x = AngleSystem::from_vec(vec![0.5; 12]);
        assert!(matches!(
            maximize(&tri, &data, &x, &SolveOptions::default()),
            Err(SolveError::NotCoherent(_))
        ));
    }

    #[test]
    fn tangent_generators_span_null_space() {
        let cases = [
            torus(),
            GluedTriangulation::from_faces(&[[0, 1, 2], [2, 1, 3]]).unwrap(),
            GluedTriangulation::from_faces(&[[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]]).unwrap(),
        ];
        for tri in cases {
            let data = AngleData { theta: vec![1.0; tri.edge_count()], xi: vec![1.0; tri.vertex_count()] };
            let cs = build_constraints(&tri, &data);
            let gens = tangent_generators(&tri);
            assert!((&cs.eq * &gens).amax() < 1e-14);
            let ns = linalg::null_space(&cs.eq, linalg::RANK_TOL);
            assert_eq!(linalg::rank(&gens.transpose(), linalg::RANK_TOL), ns.basis.ncols());
        }
    }
}
