//! Quality of a subspace against a known second moment.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::MetaParameter;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceMetrics {
    /// `Tr(UᵀΣU)`.
    pub captured_variance: f64,
    /// `Tr P_k(Σ)`, the best achievable captured variance.
    pub best_variance: f64,
    /// `‖Σ − UUᵀΣUUᵀ‖_* − ‖Σ − P_k(Σ)‖_*`.
    pub nuclear_error: f64,
    /// `‖(I − UUᵀ) w_ℓ‖` per component.
    pub residuals: Vec<f64>,
}

/// Score the basis `u` against `sigma`, or against the second moment of the
/// rank-one statistics implied by `meta` when `sigma` is `None`.
pub fn subspace_metrics(
    u: &DMatrix<f64>,
    meta: &MetaParameter,
    sigma: Option<&DMatrix<f64>>,
) -> Result<SubspaceMetrics> {
    let d = meta.dim();
    if u.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: u.nrows(),
        });
    }
    let owned;
    let sigma = match sigma {
        Some(s) => {
            if s.shape() != (d, d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: s.nrows(),
                });
            }
            s
        }
        None => {
            owned = meta.rank_one_second_moment();
            &owned
        }
    };
    let k = u.ncols();
    let captured_variance = (u.transpose() * sigma * u).trace();
    let (eigs, vecs) = linalg::sym_eigen_desc(sigma);
    let best_variance: f64 = eigs.iter().take(k).sum();
    let top = vecs.columns(0, k.min(d)).into_owned();
    let best_approx = {
        let p = linalg::projector(&top);
        &p * sigma * &p
    };
    let proj = linalg::projector(u);
    let ours = &proj * sigma * &proj;
    let nuclear_error =
        linalg::nuclear_norm_sym(&(sigma - ours)) - linalg::nuclear_norm_sym(&(sigma - best_approx));
    let complement = DMatrix::identity(d, d) - proj;
    let residuals = meta
        .w()
        .column_iter()
        .map(|w| (&complement * w).norm())
        .collect();
    Ok(SubspaceMetrics {
        captured_variance,
        best_variance,
        nuclear_error,
        residuals,
    })
}
