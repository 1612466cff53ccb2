//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of the null space of a matrix together with its rank.
#[derive(Debug, Clone)]
pub struct NullSpace {
    /// `n × k` matrix with orthonormal columns.
    pub basis: DMatrix<f64>,
    pub rank: usize,
}

/// Null space of `a` (m × n) from a full SVD. Rows are zero-padded when
/// `m < n` so that all `n` right singular vectors are available.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> NullSpace {
    let (m, n) = a.shape();
    if n == 0 {
        return NullSpace { basis: DMatrix::zeros(0, 0), rank: 0 };
    }
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = tol * sigma_max.max(1.0);
    let null_rows: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= threshold).collect();
    let rank = n - null_rows.len();
    let mut basis = DMatrix::zeros(n, null_rows.len());
    for (j, &i) in null_rows.iter().enumerate() {
        basis.set_column(j, &v_t.row(i).transpose());
    }
    NullSpace { basis, rank }
}

pub fn rank(a: &DMatrix<f64>, tol: f64) -> usize {
    null_space(a, tol).rank
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    if sym.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    let s = (sym + sym.transpose()) * 0.5;
    s.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Solves `m x = rhs` for symmetric positive definite `m`, returning `None`
/// when the Cholesky factorization fails or the spectral condition number
/// exceeds `max_condition`.
pub fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>, max_condition: f64) -> Option<DVector<f64>> {
    let eig = m.clone().symmetric_eigenvalues();
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo > max_condition {
        return None;
    }
    m.clone().cholesky().map(|c| c.solve(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_rank_deficient_matrix() {
        // Third row is the sum of the first two.
        let a = DMatrix::from_row_slice(3, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let ns = null_space(&a, RANK_TOL);
        assert_eq!(ns.rank, 2);
        assert_eq!(ns.basis.ncols(), 2);
        assert!((&a * &ns.basis).norm() < 1e-12);
        let gram = ns.basis.transpose() * &ns.basis;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn tall_full_rank_has_trivial_null_space() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let ns = null_space(&a, RANK_TOL);
        assert_eq!(ns.rank, 2);
        assert_eq!(ns.basis.ncols(), 0);
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(solve_spd(&m, &DVector::from_vec(vec![1.0, 1.0]), 1e12).is_none());
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let x = solve_spd(&m, &DVector::from_vec(vec![3.0, 3.0]), 1e12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
