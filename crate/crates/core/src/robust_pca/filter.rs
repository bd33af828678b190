//! Quantile trimming and the randomized double filter.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::rng::{self, StreamRng};

/// Largest corruption level the double filter accepts.
pub const MAX_FILTER_ALPHA: f64 = 1.0 / 36.0;

/// Multiplier of the mean-shift test.
pub const SHIFT_FACTOR: f64 = 48.0;

/// Projected energies `‖Uᵀ p_i‖²` of the columns of `points`.
pub fn rank_one_scores(points: &DMatrix<f64>, u: &DMatrix<f64>) -> Result<Vec<f64>> {
    if points.nrows() != u.nrows() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            actual: points.nrows(),
        });
    }
    let proj = u.tr_mul(points);
    Ok(proj.column_iter().map(|c| c.norm_squared()).collect())
}

/// Survivors of removing the `⌈2αn⌉` largest and `⌈2αn⌉` smallest scores,
/// returned as sorted positions into `scores`. Among equal scores the lower
/// position survives.
pub fn first_filter(scores: &[f64], alpha: f64) -> Result<Vec<usize>> {
    let n = scores.len();
    if n == 0 {
        return Err(Error::EmptyInput("no scores to filter"));
    }
    if !(0.0..0.25).contains(&alpha) {
        return Err(invalid("alpha", format!("need 0 <= alpha < 1/4, got {alpha}")));
    }
    let cut = (2.0 * alpha * n as f64).ceil() as usize;
    if cut == 0 {
        return Ok((0..n).collect());
    }
    if 2 * cut >= n {
        return Err(invalid(
            "alpha",
            format!("removing {cut} from each tail leaves nothing of {n} scores"),
        ));
    }
    let mut removed = vec![false; n];
    let mut ascending: Vec<usize> = (0..n).collect();
    ascending.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a)));
    for &i in ascending.iter().take(cut) {
        removed[i] = true;
    }
    let mut descending: Vec<usize> = (0..n).collect();
    descending.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(b.cmp(&a)));
    let mut taken = 0;
    for &i in &descending {
        if taken == cut {
            break;
        }
        if !removed[i] {
            removed[i] = true;
            taken += 1;
        }
    }
    Ok((0..n).filter(|&i| !removed[i]).collect())
}

/// Outcome of one double-filter call on a subset of points.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterStep {
    /// Surviving point indices, sorted.
    pub survivors: Vec<usize>,
    /// Indices kept by the quantile trim, sorted.
    pub trimmed: Vec<usize>,
    /// Top-`k` basis of the input subset.
    pub basis: DMatrix<f64>,
    /// Scores of the input subset, aligned with `input`.
    pub scores: Vec<f64>,
    /// The input subset, sorted.
    pub input: Vec<usize>,
    pub mean_all: f64,
    pub mean_trimmed: f64,
    /// Right-hand side of the mean-shift test.
    pub threshold: f64,
    /// Re-admission cap `W`, present only when the second filter ran.
    pub cap: Option<f64>,
    pub changed: bool,
}

impl FilterStep {
    /// Whether the mean-shift test passed, so the input was returned as is.
    pub fn shift_small(&self) -> bool {
        self.mean_all - self.mean_trimmed <= self.threshold
    }
}

pub(crate) fn validate_filter_args(
    n: usize,
    d: usize,
    k: usize,
    alpha: f64,
    nu: f64,
) -> Result<()> {
    if !(alpha > 0.0 && alpha <= MAX_FILTER_ALPHA) {
        return Err(invalid("alpha", format!("need 0 < alpha <= 1/36, got {alpha}")));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid("nu", format!("need nu > 0, got {nu}")));
    }
    if k == 0 || k > d {
        return Err(invalid("k", format!("need 1 <= k <= d = {d}, got {k}")));
    }
    if n < k {
        return Err(invalid("points", format!("need at least k = {k} points, got {n}")));
    }
    Ok(())
}

/// One double-filter pass over `subset` (sorted column indices of `points`).
pub(crate) fn double_filter_subset(
    points: &DMatrix<f64>,
    subset: &[usize],
    k: usize,
    alpha: f64,
    nu: f64,
    rng: &mut StreamRng,
) -> Result<FilterStep> {
    let d = points.nrows();
    validate_filter_args(subset.len(), d, k, alpha, nu)?;
    let sub = points.select_columns(subset);
    let acc = &sub * sub.transpose();
    let basis = match linalg::top_k_eigenbasis(&acc, k) {
        Ok(u) => u,
        // All points are zero: every score vanishes and nothing can move.
        Err(Error::ZeroAccumulator) => DMatrix::identity(d, k),
        Err(e) => return Err(e),
    };
    let scores = rank_one_scores(&sub, &basis)?;
    let kept = first_filter(&scores, alpha)?;
    if kept.is_empty() {
        return Err(Error::EmptyInput("first filter removed every point"));
    }
    let n = scores.len() as f64;
    let mean_all = scores.iter().sum::<f64>() / n;
    let mean_trimmed = kept.iter().map(|&i| scores[i]).sum::<f64>() / kept.len() as f64;
    let threshold = SHIFT_FACTOR * (alpha * mean_trimmed + nu * (k as f64 * alpha).sqrt());
    let trimmed: Vec<usize> = kept.iter().map(|&i| subset[i]).collect();
    let input = subset.to_vec();
    if mean_all - mean_trimmed <= threshold {
        return Ok(FilterStep {
            survivors: input.clone(),
            trimmed,
            basis,
            scores,
            input,
            mean_all,
            mean_trimmed,
            threshold,
            cap: None,
            changed: false,
        });
    }
    let mut in_kept = vec![false; subset.len()];
    for &i in &kept {
        in_kept[i] = true;
    }
    let max_excess = (0..subset.len())
        .filter(|&i| !in_kept[i])
        .map(|i| scores[i] - mean_trimmed)
        .fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = rng.random();
    let cap = z * max_excess;
    let survivors: Vec<usize> = (0..subset.len())
        .filter(|&i| in_kept[i] || scores[i] - mean_trimmed <= cap)
        .map(|i| subset[i])
        .collect();
    let changed = survivors.len() != subset.len();
    Ok(FilterStep {
        survivors,
        trimmed,
        basis,
        scores,
        input,
        mean_all,
        mean_trimmed,
        threshold,
        cap: Some(cap),
        changed,
    })
}

/// A single double-filter pass over all columns of `points`.
///
/// Trims the upper and lower `2α` score quantiles; if the trim barely moves
/// the mean score the input is returned unchanged, otherwise trimmed points
/// are re-admitted when their excess score is at most a uniformly random
/// fraction of the largest excess.
pub fn double_filter(
    points: &DMatrix<f64>,
    k: usize,
    alpha: f64,
    nu: f64,
    seed: u64,
) -> Result<FilterStep> {
    let all: Vec<usize> = (0..points.ncols()).collect();
    let mut rng = rng::stream(seed, 0);
    double_filter_subset(points, &all, k, alpha, nu, &mut rng)
}
