//! Clustering of heavy tasks in the estimated subspace.
//!
//! Heavy tasks are embedded as projected moment estimates, clustered by a
//! trimmed, fold-boosted Lloyd procedure, lifted back to `ℝ^d`, and each
//! cluster gets a residual radius `r̃² ≈ ‖w̃ − w‖² + s²` from a trimmed mean
//! of per-task residuals. [`moments`] holds Monte-Carlo checks of the moment
//! identities the clustering analysis relies on.

mod cluster;
pub mod moments;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::model::Batch;

pub use crate::stats::{clamped_trimmed_mean, trimmed_mean};
pub use cluster::{greedy_match, match_centers, robust_cluster, Clustering};

/// Smallest radius stored in a [`ClusterModel`].
pub const RADIUS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringConfig {
    pub k: usize,
    /// Moment order; only used by diagnostics.
    pub m: usize,
    /// Outlier fraction trimmed inside Lloyd updates and at assignment.
    pub trim: f64,
    /// Number of folds combined by the coordinatewise median.
    pub boosts: usize,
}

impl ClusteringConfig {
    pub fn new(k: usize, trim: f64, boosts: usize) -> Self {
        Self {
            k,
            m: 2,
            trim,
            boosts,
        }
    }

    /// `⌈4 ln(1/δ)⌉` folds.
    pub fn default_boosts(delta: f64) -> usize {
        ((4.0 * (1.0 / delta).ln()).ceil() as usize).max(1)
    }

    /// Trim level `α/p_min`, capped below `1/4`.
    pub fn default_trim(alpha: f64, p_min: f64) -> f64 {
        (alpha / p_min).min(0.249)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("k", "need k >= 1"));
        }
        if self.m == 0 {
            return Err(invalid("m", "need m >= 1"));
        }
        if !(0.0..0.25).contains(&self.trim) {
            return Err(invalid("trim", format!("need 0 <= trim < 1/4, got {}", self.trim)));
        }
        if self.boosts == 0 {
            return Err(invalid("boosts", "need at least one fold"));
        }
        Ok(())
    }
}

/// Coarse mixture estimate from the heavy tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    /// Centers `w̃_ℓ ∈ ℝ^d`.
    pub centers: Vec<DVector<f64>>,
    /// Radii `r̃_ℓ²`, floored at [`RADIUS_FLOOR`].
    pub radii: Vec<f64>,
    /// Heavy-task labels, `None` for outliers.
    pub assignments: Vec<Option<usize>>,
}

impl ClusterModel {
    pub fn new(
        centers: Vec<DVector<f64>>,
        radii: Vec<f64>,
        assignments: Vec<Option<usize>>,
    ) -> Result<Self> {
        if centers.is_empty() {
            return Err(invalid("centers", "need at least one center"));
        }
        if radii.len() != centers.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                actual: radii.len(),
            });
        }
        let d = centers[0].len();
        if let Some(c) = centers.iter().find(|c| c.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: c.len(),
            });
        }
        if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(invalid("radii", "radii must be finite and non-negative"));
        }
        let radii = radii.into_iter().map(|r| r.max(RADIUS_FLOOR)).collect();
        Ok(Self {
            centers,
            radii,
            assignments,
        })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }
}

/// Project each task's moment estimate `(1/t) Σ_j y_j x_j` onto `U`; the
/// result has one column per task.
pub fn embed_heavy<B: AsRef<Batch>>(heavy: &[B], u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(u.ncols(), heavy.len());
    for (i, task) in heavy.iter().enumerate() {
        let b = task.as_ref();
        if b.dim() != u.nrows() {
            return Err(Error::DimensionMismatch {
                expected: u.nrows(),
                actual: b.dim(),
            });
        }
        out.set_column(i, &u.tr_mul(&b.moment_estimate()));
    }
    Ok(out)
}

/// Map embedded centers back to `ℝ^d` as `U c`.
pub fn lift(u: &DMatrix<f64>, centers: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    centers
        .iter()
        .map(|c| {
            if c.len() != u.ncols() {
                Err(Error::DimensionMismatch {
                    expected: u.ncols(),
                    actual: c.len(),
                })
            } else {
                Ok(u * c)
            }
        })
        .collect()
}

/// Per-cluster radius `r̃_ℓ²`: a trimmed mean (level `α/p̂_ℓ`) of the mean
/// squared residuals of the tasks assigned to `ℓ`, or the plain mean when
/// `alpha = 0`.
pub fn estimate_r2<B: AsRef<Batch>>(
    heavy: &[B],
    centers: &[DVector<f64>],
    assignments: &[Option<usize>],
    alpha: f64,
) -> Result<Vec<f64>> {
    if assignments.len() != heavy.len() {
        return Err(Error::DimensionMismatch {
            expected: heavy.len(),
            actual: assignments.len(),
        });
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid("alpha", format!("need 0 <= alpha < 1, got {alpha}")));
    }
    let n = heavy.len() as f64;
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); centers.len()];
    for (task, label) in heavy.iter().zip(assignments) {
        if let Some(l) = *label {
            if l >= centers.len() {
                return Err(invalid("assignments", format!("label {l} out of range")));
            }
            groups[l].push(task.as_ref().mean_squared_residual(&centers[l]));
        }
    }
    groups
        .iter()
        .enumerate()
        .map(|(l, residuals)| {
            if residuals.is_empty() {
                return Err(Error::EmptyCluster(l));
            }
            let p_hat = residuals.len() as f64 / n;
            clamped_trimmed_mean(residuals, alpha / p_hat)
        })
        .collect()
}
