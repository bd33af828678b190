//! Dense linear-algebra helpers shared by the estimators.
//!
//! Point sets are stored as `d × n` matrices whose columns are the points,
//! so each point is a contiguous slice.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

/// `Σ p pᵀ` over the selected columns (all columns when `idx` is `None`).
pub fn second_moment_sum(points: &DMatrix<f64>, idx: Option<&[usize]>) -> DMatrix<f64> {
    match idx {
        None => points * points.transpose(),
        Some(idx) => {
            let sub = points.select_columns(idx);
            &sub * sub.transpose()
        }
    }
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. Ties keep the solver's original column order.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

/// Top-`k` orthonormal eigenbasis of a symmetric accumulator, eigenvalues
/// descending, each column signed so its largest-magnitude entry is positive.
pub fn top_k_eigenbasis(acc: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let d = acc.nrows();
    if acc.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: acc.ncols(),
        });
    }
    if k == 0 || k > d {
        return Err(invalid("k", format!("need 1 <= k <= d = {d}, got {k}")));
    }
    if acc.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroAccumulator);
    }
    let sym = (acc + acc.transpose()) * 0.5;
    let (_, vectors) = sym_eigen_desc(&sym);
    let mut basis = vectors.columns(0, k).into_owned();
    for mut col in basis.column_iter_mut() {
        let mut pivot = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(basis)
}

/// Largest absolute entry of `UᵀU − I`.
pub fn orthonormality_error(u: &DMatrix<f64>) -> f64 {
    let gram = u.transpose() * u;
    let id = DMatrix::<f64>::identity(u.ncols(), u.ncols());
    (gram - id).amax()
}

/// Orthogonal projector `UUᵀ`.
pub fn projector(u: &DMatrix<f64>) -> DMatrix<f64> {
    u * u.transpose()
}

/// Nuclear norm of a symmetric matrix (sum of absolute eigenvalues).
pub fn nuclear_norm_sym(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().map(|v| v.abs()).sum()
}

/// Largest principal angle (radians) between the column spans of two
/// semi-orthogonal matrices of equal rank.
pub fn max_principal_angle(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let cross = u.transpose() * v;
    let sv = cross.singular_values();
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    smallest.clamp(-1.0, 1.0).acos()
}

/// Least-squares solve of `X w = y` through the normal equations.
pub fn normal_equations_solve(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = x.shape();
    if y.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            actual: y.len(),
        });
    }
    if rows < cols {
        return Err(Error::SingularSystem { rows, cols });
    }
    let gram = x.tr_mul(x);
    let rhs = x.tr_mul(y);
    let chol = gram.cholesky().ok_or(Error::SingularSystem { rows, cols })?;
    Ok(chol.solve(&rhs))
}
