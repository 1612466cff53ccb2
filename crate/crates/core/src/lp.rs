//! Dense two-phase simplex for `min cᵀz  s.t.  A z = b, z ≥ 0`.
//!
//! Pivoting follows Bland's rule (lowest eligible index for both entering
//! and leaving variable), so degenerate problems cannot cycle. The problems
//! solved here are small, so a full tableau is fine.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub pivot_tol: f64,
    /// Phase-one objective above this (times `max(1, |b|∞)`) means infeasible.
    pub feasibility_tol: f64,
    pub max_iters: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { pivot_tol: 1e-9, feasibility_tol: 1e-9, max_iters: 100_000 }
    }
}

/// Linear program in standard equality form.
#[derive(Debug, Clone)]
pub struct StandardLp {
    /// Row-major `m × n`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        z: Vec<f64>,
        value: f64,
        /// Row multipliers `y` with `cᵀz = yᵀb` at optimality.
        duals: Vec<f64>,
    },
    Infeasible {
        /// Minimum total artificial infeasibility.
        phase_one_value: f64,
        /// Phase-one row multipliers.
        farkas: Vec<f64>,
    },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs, last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    active: Vec<bool>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs Bland-rule iterations over columns `< allowed`. Returns `false`
    /// if the objective is unbounded below.
    fn run(&mut self, allowed: usize, opts: &SimplexOptions, iters: &mut usize) -> Result<bool, LpError> {
        let rhs = self.width - 1;
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -opts.pivot_tol) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                if !self.active[i] {
                    continue;
                }
                let a = self.rows[i][enter];
                if a > opts.pivot_tol {
                    let ratio = self.rows[i][rhs].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            *iters += 1;
            if *iters > opts.max_iters {
                return Err(LpError::IterationLimit(opts.max_iters));
            }
            self.pivot(r, enter);
        }
    }
}

/// Solves a standard-form LP.
pub fn solve(lp: &StandardLp, opts: &SimplexOptions) -> Result<LpOutcome, LpError> {
    let m = lp.a.len();
    let n = lp.c.len();
    if lp.b.len() != m || lp.a.iter().any(|r| r.len() != n) {
        return Err(LpError::Dimension(format!("A is {m}x?, b has {}, c has {n}", lp.b.len())));
    }
    let width = n + m + 1;
    let sign: Vec<f64> = lp.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut rows = vec![vec![0.0; width]; m];
    for i in 0..m {
        for j in 0..n {
            rows[i][j] = sign[i] * lp.a[i][j];
        }
        rows[i][n + i] = 1.0;
        rows[i][width - 1] = sign[i] * lp.b[i];
    }
    let mut cost = vec![0.0; width];
    for row in &rows {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[width - 1] -= row[width - 1];
    }
    let mut tab = Tableau { rows, cost, basis: (n..n + m).collect(), active: vec![true; m], width };
    let mut iters = 0;
    tab.run(n, opts, &mut iters)?;

    let phase_one_value = -tab.cost[width - 1];
    let b_scale = lp.b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    if phase_one_value > opts.feasibility_tol * b_scale {
        let farkas = (0..m).map(|i| sign[i] * (1.0 - tab.cost[n + i])).collect();
        return Ok(LpOutcome::Infeasible { phase_one_value, farkas });
    }

    // Drive remaining artificials out of the basis; rows where that is
    // impossible are linearly dependent on the others.
    for i in 0..m {
        if tab.basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| tab.rows[i][j].abs() > opts.pivot_tol) {
            Some(j) => tab.pivot(i, j),
            None => tab.active[i] = false,
        }
    }

    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(&lp.c);
    for i in 0..m {
        let cb = if tab.basis[i] < n { lp.c[tab.basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for (v, r) in cost.iter_mut().zip(&tab.rows[i]) {
                *v -= cb * r;
            }
        }
    }
    for i in 0..m {
        cost[tab.basis[i]] = 0.0;
    }
    tab.cost = cost;
    if !tab.run(n, opts, &mut iters)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut z = vec![0.0; n];
    for i in 0..m {
        if tab.active[i] && tab.basis[i] < n {
            z[tab.basis[i]] = tab.rows[i][width - 1].max(0.0);
        }
    }
    let value = lp.c.iter().zip(&z).map(|(c, z)| c * z).sum();
    let duals = (0..m).map(|i| -sign[i] * tab.cost[n + i]).collect();
    Ok(LpOutcome::Optimal { z, value, duals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(a: &[&[f64]], b: &[f64], c: &[f64]) -> StandardLp {
        StandardLp { a: a.iter().map(|r| r.to_vec()).collect(), b: b.to_vec(), c: c.to_vec() }
    }

    #[test]
    fn small_optimum_with_duals() {
        // max x + y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let p = lp(&[&[1.0, 2.0, 1.0, 0.0], &[3.0, 1.0, 0.0, 1.0]], &[4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0]);
        match solve(&p, &SimplexOptions::default()).unwrap() {
            LpOutcome::Optimal { z, value, duals } => {
                assert!((z[0] - 1.6).abs() < 1e-12 && (z[1] - 1.2).abs() < 1e-12);
                assert!((value + 2.8).abs() < 1e-12);
                let dual_obj: f64 = duals.iter().zip(&p.b).map(|(y, b)| y * b).sum();
                assert!((dual_obj - value).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        let p = lp(&[&[1.0, 1.0], &[1.0, 1.0]], &[1.0, 2.0], &[0.0, 0.0]);
        assert!(matches!(solve(&p, &SimplexOptions::default()).unwrap(), LpOutcome::Infeasible { .. }));
        let p = lp(&[&[1.0]], &[-1.0], &[0.0]);
        assert!(matches!(solve(&p, &SimplexOptions::default()).unwrap(), LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let p = lp(&[&[1.0, 1.0], &[2.0, 2.0]], &[1.0, 2.0], &[1.0, 2.0]);
        match solve(&p, &SimplexOptions::default()).unwrap() {
            LpOutcome::Optimal { z, value, .. } => {
                assert_eq!(z, vec![1.0, 0.0]);
                assert_eq!(value, 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_unboundedness() {
        let p = lp(&[&[1.0, -1.0]], &[0.0], &[-1.0, 0.0]);
        assert_eq!(solve(&p, &SimplexOptions::default()).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let p = lp(&[&[1.0, 2.0, 1.0, 0.0], &[3.0, 1.0, 0.0, 1.0]], &[4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0]);
        let opts = SimplexOptions { max_iters: 1, ..Default::default() };
        assert_eq!(solve(&p, &opts), Err(LpError::IterationLimit(1)));
    }
}
