//! Likelihood classification of light tasks and refined parameter estimates.
//!
//! Each light task goes to the cluster minimizing its Gaussian negative
//! log-likelihood under the coarse model. Every cluster is then refit with
//! residual-trimmed least squares, its noise level re-estimated from
//! per-task residuals, and its weight taken as the fraction of tasks it
//! received.

use nalgebra::{DMatrix, DVector};

use crate::clustering::{greedy_match, ClusterModel};
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::model::{Batch, MetaParameter};
use crate::stats::clamped_trimmed_mean;

/// Default number of trimming rounds.
pub const DEFAULT_TLS_ROUNDS: usize = 10;

/// Largest per-cluster corruption budget handed to the robust regression.
pub const MAX_CLUSTER_BUDGET: f64 = 0.25;

/// Label minimizing `Σ_j (y_j − x_jᵀ w̃_ℓ)² / (2 r̃_ℓ²) + t log r̃_ℓ`; ties
/// go to the lowest label.
pub fn classify<B: AsRef<Batch>>(batch: &B, model: &ClusterModel) -> usize {
    let b = batch.as_ref();
    let t = b.len() as f64;
    let mut best = (0, f64::INFINITY);
    for (l, (w, &r2)) in model.centers.iter().zip(&model.radii).enumerate() {
        let ssr = (&b.labels - &b.covariates * w).norm_squared();
        let objective = ssr / (2.0 * r2) + 0.5 * t * r2.ln();
        if objective < best.1 {
            best = (l, objective);
        }
    }
    best.0
}

/// Ordinary least squares through the normal equations.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    linalg::normal_equations_solve(x, y)
}

/// Least squares that repeatedly drops the largest residuals.
///
/// Each of `max_rounds` rounds fits OLS on the surviving rows and removes
/// the `⌈α·n/max_rounds⌉` rows with the largest absolute residuals (lower
/// row index survives ties); the fit on the final survivors is returned.
/// With `alpha = 0` this is a single [`ols`] call.
pub fn trimmed_least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    alpha: f64,
    max_rounds: usize,
) -> Result<DVector<f64>> {
    let (n, d) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n <= d {
        return Err(Error::SingularSystem { rows: n, cols: d });
    }
    if !(0.0..=MAX_CLUSTER_BUDGET).contains(&alpha) {
        return Err(invalid("alpha", format!("need 0 <= alpha <= 1/4, got {alpha}")));
    }
    if alpha == 0.0 || max_rounds == 0 {
        return ols(x, y);
    }
    let per_round = (alpha * n as f64 / max_rounds as f64).ceil() as usize;
    let mut rows: Vec<usize> = (0..n).collect();
    for _ in 0..max_rounds {
        let remove = per_round.min(rows.len().saturating_sub(d + 1));
        if remove == 0 {
            break;
        }
        let xs = x.select_rows(&rows);
        let ys = DVector::from_iterator(rows.len(), rows.iter().map(|&i| y[i]));
        let w = ols(&xs, &ys)?;
        let resid = (&ys - &xs * &w).map(f64::abs);
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| resid[b].total_cmp(&resid[a]).then(b.cmp(&a)));
        let mut drop = vec![false; rows.len()];
        for &p in order.iter().take(remove) {
            drop[p] = true;
        }
        rows = rows
            .iter()
            .zip(&drop)
            .filter(|(_, &gone)| !gone)
            .map(|(&i, _)| i)
            .collect();
    }
    let xs = x.select_rows(&rows);
    let ys = DVector::from_iterator(rows.len(), rows.iter().map(|&i| y[i]));
    ols(&xs, &ys)
}

/// Error of one fitted component against its matched true component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentError {
    /// Index of the fitted component matched to this true component.
    pub fitted: usize,
    /// `‖ŵ − w‖ / s` (absolute error when `s = 0`).
    pub w_rel: f64,
    /// `|ŝ² − s²| / s²` (absolute error when `s = 0`).
    pub s2_rel: f64,
    /// `|p̂ − p|`.
    pub p_abs: f64,
}

/// Refined mixture estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedMeta {
    pub w_hat: Vec<DVector<f64>>,
    pub s2_hat: Vec<f64>,
    pub p_hat: Vec<f64>,
    /// Components that received no tasks (or too few examples to refit) and
    /// kept the coarse center and radius.
    pub fallback: Vec<bool>,
    /// Per true component errors, filled by [`FittedMeta::evaluate`].
    pub errors: Option<Vec<ComponentError>>,
}

impl FittedMeta {
    /// Exact parameters of a known mixture.
    pub fn from_meta(meta: &MetaParameter) -> Self {
        Self {
            w_hat: meta.w().column_iter().map(|c| c.into_owned()).collect(),
            s2_hat: meta.s().iter().map(|s| s * s).collect(),
            p_hat: meta.p().iter().copied().collect(),
            fallback: vec![false; meta.k()],
            errors: None,
        }
    }

    pub fn k(&self) -> usize {
        self.w_hat.len()
    }

    /// Match fitted components to the truth greedily by `‖ŵ − w‖` and store
    /// per-component errors, indexed by true component.
    pub fn evaluate(&mut self, meta: &MetaParameter) -> Result<&[ComponentError]> {
        if self.k() != meta.k() {
            return Err(Error::DimensionMismatch {
                expected: meta.k(),
                actual: self.k(),
            });
        }
        let truth: Vec<DVector<f64>> = meta.w().column_iter().map(|c| c.into_owned()).collect();
        let order = greedy_match(&truth, &self.w_hat);
        let errors = (0..meta.k())
            .map(|l| {
                let j = order[l];
                let s = meta.s()[l];
                let s2 = s * s;
                let w_err = (&self.w_hat[j] - &truth[l]).norm();
                let s2_err = (self.s2_hat[j] - s2).abs();
                ComponentError {
                    fitted: j,
                    w_rel: if s > 0.0 { w_err / s } else { w_err },
                    s2_rel: if s2 > 0.0 { s2_err / s2 } else { s2_err },
                    p_abs: (self.p_hat[j] - meta.p()[l]).abs(),
                }
            })
            .collect();
        self.errors = Some(errors);
        Ok(self.errors.as_deref().unwrap())
    }
}

fn pool<B: AsRef<Batch>>(tasks: &[&B]) -> (DMatrix<f64>, DVector<f64>) {
    let rows: usize = tasks.iter().map(|t| t.as_ref().len()).sum();
    let d = tasks[0].as_ref().dim();
    let mut x = DMatrix::zeros(rows, d);
    let mut y = DVector::zeros(rows);
    let mut r = 0;
    for t in tasks {
        let b = t.as_ref();
        x.rows_mut(r, b.len()).copy_from(&b.covariates);
        y.rows_mut(r, b.len()).copy_from(&b.labels);
        r += b.len();
    }
    (x, y)
}

/// Classify `light2`, then refit every cluster robustly.
pub fn refine<B: AsRef<Batch>>(light2: &[B], model: &ClusterModel, alpha: f64) -> Result<FittedMeta> {
    if light2.is_empty() {
        return Err(Error::EmptyInput("no light tasks to refine with"));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid("alpha", format!("need 0 <= alpha < 1, got {alpha}")));
    }
    let k = model.k();
    let d = model.dim();
    if let Some(b) = light2.iter().find(|b| b.as_ref().dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: b.as_ref().dim(),
        });
    }
    let n = light2.len() as f64;
    let labels: Vec<usize> = light2.iter().map(|b| classify(b, model)).collect();
    let mut fitted = FittedMeta {
        w_hat: Vec::with_capacity(k),
        s2_hat: Vec::with_capacity(k),
        p_hat: Vec::with_capacity(k),
        fallback: vec![false; k],
        errors: None,
    };
    for l in 0..k {
        let members: Vec<&B> = light2
            .iter()
            .zip(&labels)
            .filter(|(_, &h)| h == l)
            .map(|(b, _)| b)
            .collect();
        let p_hat = members.len() as f64 / n;
        let rows: usize = members.iter().map(|b| b.as_ref().len()).sum();
        if members.is_empty() || rows <= d {
            log::warn!("cluster {l} has {} tasks; keeping the coarse estimate", members.len());
            fitted.w_hat.push(model.centers[l].clone());
            fitted.s2_hat.push(model.radii[l]);
            fitted.p_hat.push(p_hat);
            fitted.fallback[l] = true;
            continue;
        }
        let budget = if alpha > 0.0 {
            (4.0 * alpha / p_hat).min(MAX_CLUSTER_BUDGET)
        } else {
            0.0
        };
        let (x, y) = pool(&members);
        let w = trimmed_least_squares(&x, &y, budget, DEFAULT_TLS_ROUNDS)?;
        let residuals: Vec<f64> = members
            .iter()
            .map(|b| b.as_ref().mean_squared_residual(&w))
            .collect();
        let s2 = clamped_trimmed_mean(&residuals, budget)?;
        fitted.w_hat.push(w);
        fitted.s2_hat.push(s2);
        fitted.p_hat.push(p_hat);
    }
    Ok(fitted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_center_model() -> ClusterModel {
        ClusterModel::new(
            vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![-1.0, 0.0])],
            vec![1.0, 1.0],
            Vec::new(),
        )
        .unwrap()
    }

    #[test]
    fn single_center_always_wins() {
        let model =
            ClusterModel::new(vec![DVector::from_vec(vec![5.0, 5.0])], vec![2.0], Vec::new()).unwrap();
        let b = Batch::new(DMatrix::identity(2, 2), DVector::from_vec(vec![-9.0, 3.0])).unwrap();
        assert_eq!(classify(&b, &model), 0);
    }

    #[test]
    fn noiseless_batch_goes_to_its_center() {
        let x = DMatrix::from_fn(5, 2, |i, j| (i as f64 + 1.0) * if j == 0 { 1.0 } else { -0.5 });
        let y = &x * DVector::from_vec(vec![1.0, 0.0]);
        let b = Batch::new(x, y).unwrap();
        assert_eq!(classify(&b, &two_center_model()), 0);
    }

    #[test]
    fn equidistant_batch_ties_to_lowest() {
        let x = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let b = Batch::new(x, DVector::from_vec(vec![0.0])).unwrap();
        assert_eq!(classify(&b, &two_center_model()), 0);
    }

    #[test]
    fn alpha_zero_is_plain_ols() {
        let x = DMatrix::from_fn(30, 3, |i, j| ((i * 7 + j * 5) % 11) as f64 - 5.0);
        let y = DVector::from_fn(30, |i, _| (i % 4) as f64);
        assert_eq!(trimmed_least_squares(&x, &y, 0.0, 10).unwrap(), ols(&x, &y).unwrap());
    }

    #[test]
    fn underdetermined_is_rejected() {
        let x = DMatrix::from_element(3, 3, 1.0);
        let y = DVector::from_element(3, 1.0);
        assert!(matches!(
            trimmed_least_squares(&x, &y, 0.1, 10),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn matching_recovers_permutation() {
        let a = vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![5.0])];
        let b = vec![DVector::from_vec(vec![5.1]), DVector::from_vec(vec![-0.1])];
        assert_eq!(greedy_match(&a, &b), vec![1, 0]);
    }
}
