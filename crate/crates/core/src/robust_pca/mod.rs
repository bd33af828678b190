//! Outlier-robust subspace estimation.
//!
//! [`robust_subspace`] repeats the [`double_filter`] until its survivor set
//! stops changing, restarts the whole procedure a few times with fresh
//! randomness, and returns the top-`k` eigenbasis of the largest surviving
//! set. [`hrpca`] is a one-point-per-round baseline; [`subspace_metrics`]
//! scores a basis against a known second moment.

mod filter;
mod hrpca;
mod metrics;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::linalg;
use crate::rng;

pub use filter::{
    double_filter, first_filter, rank_one_scores, FilterStep, MAX_FILTER_ALPHA, SHIFT_FACTOR,
};
pub use hrpca::{hrpca, hrpca_trace, HrpcaTrace};
pub use metrics::{subspace_metrics, SubspaceMetrics};

/// Smallest level used when a caller asks for `α = 0`; the filter needs a
/// strictly positive budget.
pub const MIN_FILTER_ALPHA: f64 = 1e-6;

/// Bookkeeping from a subspace estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterDiagnostics {
    /// Indices of the points the final basis was computed from, sorted.
    pub survivors: Vec<usize>,
    pub restarts_run: usize,
    /// Filter calls (or removal rounds) per restart.
    pub inner_iterations: Vec<usize>,
    /// Restart whose survivor set was kept.
    pub selected_restart: usize,
    /// Uncorrupted points outside `survivors`; filled by [`SubspaceEstimate::attribute`].
    pub removed_good: Option<usize>,
    /// Corrupted points outside `survivors`; filled by [`SubspaceEstimate::attribute`].
    pub removed_corrupted: Option<usize>,
    /// Level the caller asked for.
    pub alpha_requested: f64,
    /// Level actually used, after clamping.
    pub alpha_used: f64,
    /// Number of input points.
    pub n_points: usize,
}

impl FilterDiagnostics {
    pub fn alpha_clamped(&self) -> bool {
        self.alpha_requested != self.alpha_used
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEstimate {
    /// `d × k` semi-orthogonal basis.
    pub basis: DMatrix<f64>,
    pub diagnostics: FilterDiagnostics,
}

impl SubspaceEstimate {
    /// Count removed points by their corruption flags. Evaluation only; the
    /// estimators never see the flags.
    pub fn attribute(&mut self, corrupted: &[bool]) -> Result<()> {
        let diag = &mut self.diagnostics;
        if corrupted.len() != diag.n_points {
            return Err(crate::Error::DimensionMismatch {
                expected: diag.n_points,
                actual: corrupted.len(),
            });
        }
        let mut kept = vec![false; diag.n_points];
        for &i in &diag.survivors {
            kept[i] = true;
        }
        let (mut good, mut bad) = (0, 0);
        for (i, &flag) in corrupted.iter().enumerate() {
            if !kept[i] {
                if flag {
                    bad += 1;
                } else {
                    good += 1;
                }
            }
        }
        diag.removed_good = Some(good);
        diag.removed_corrupted = Some(bad);
        Ok(())
    }
}

/// Default fourth-moment scale `ν = √k ρ²`.
pub fn default_nu(k: usize, rho: f64) -> f64 {
    (k as f64).sqrt() * rho * rho
}

/// Number of independent restarts for failure probability `delta`:
/// `⌈log₆(2/δ)⌉`.
pub fn restart_count(delta: f64) -> usize {
    ((2.0 / delta).ln() / 6f64.ln()).ceil().max(1.0) as usize
}

/// Cap on filter calls per restart: `⌈9αn⌉`.
pub fn iteration_cap(alpha: f64, n: usize) -> usize {
    (9.0 * alpha * n as f64).ceil().max(1.0) as usize
}

/// Map an arbitrary level into the filter's accepted range `(0, 1/36]`.
pub fn clamp_filter_alpha(alpha: f64) -> f64 {
    if alpha > MAX_FILTER_ALPHA {
        log::warn!("alpha {alpha} exceeds 1/36; clamping");
        MAX_FILTER_ALPHA
    } else if alpha < MIN_FILTER_ALPHA {
        MIN_FILTER_ALPHA
    } else {
        alpha
    }
}

/// Top-`k` subspace of the second moment of the columns of `points`.
pub fn top_k_subspace(points: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    linalg::top_k_eigenbasis(&linalg::second_moment_sum(points, None), k)
}

/// Top-`k` subspace of a symmetric accumulator.
pub fn top_k_subspace_of(acc: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    linalg::top_k_eigenbasis(acc, k)
}

/// Survivor trajectory of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    /// Survivor sets after each filter call, starting with the full set.
    pub sets: Vec<Vec<usize>>,
    pub steps: Vec<FilterStep>,
}

fn run_restart(
    points: &DMatrix<f64>,
    k: usize,
    alpha: f64,
    nu: f64,
    seed: u64,
    restart: usize,
    keep_trace: bool,
) -> Result<(Vec<usize>, usize, Option<RestartTrace>)> {
    let n = points.ncols();
    let cap = iteration_cap(alpha, n);
    let mut rng = rng::stream_for(seed, &[restart as u64]);
    let mut current: Vec<usize> = (0..n).collect();
    let mut trace = keep_trace.then(|| RestartTrace {
        sets: vec![current.clone()],
        steps: Vec::new(),
    });
    let mut calls = 0;
    while calls < cap {
        let step = filter::double_filter_subset(points, &current, k, alpha, nu, &mut rng)?;
        calls += 1;
        let changed = step.changed;
        current = step.survivors.clone();
        if let Some(t) = trace.as_mut() {
            t.sets.push(current.clone());
            t.steps.push(step);
        }
        if !changed {
            break;
        }
    }
    Ok((current, calls, trace))
}

/// Full per-restart trajectories, for diagnostics and property checks.
pub fn robust_subspace_traces(
    points: &DMatrix<f64>,
    k: usize,
    alpha: f64,
    nu: f64,
    delta: f64,
    seed: u64,
) -> Result<Vec<RestartTrace>> {
    validate(points, k, alpha, nu, delta)?;
    (0..restart_count(delta))
        .map(|r| run_restart(points, k, alpha, nu, seed, r, true).map(|(_, _, t)| t.unwrap()))
        .collect()
}

fn validate(points: &DMatrix<f64>, k: usize, alpha: f64, nu: f64, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid("delta", format!("need 0 < delta < 1/2, got {delta}")));
    }
    filter::validate_filter_args(points.ncols(), points.nrows(), k, alpha, nu)
}

/// Robust top-`k` subspace of the columns of `points` when an `alpha`
/// fraction of them may be arbitrary.
pub fn robust_subspace(
    points: &DMatrix<f64>,
    k: usize,
    alpha: f64,
    nu: f64,
    delta: f64,
    seed: u64,
) -> Result<SubspaceEstimate> {
    validate(points, k, alpha, nu, delta)?;
    let restarts = restart_count(delta);
    let mut best: Option<(Vec<usize>, usize)> = None;
    let mut iterations = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let (set, calls, _) = run_restart(points, k, alpha, nu, seed, r, false)?;
        iterations.push(calls);
        log::debug!("restart {r}: {} survivors after {calls} calls", set.len());
        if best.as_ref().is_none_or(|(b, _)| set.len() > b.len()) {
            best = Some((set, r));
        }
    }
    let (survivors, selected) = best.expect("at least one restart");
    let acc = linalg::second_moment_sum(points, Some(&survivors));
    let basis = match linalg::top_k_eigenbasis(&acc, k) {
        Err(crate::Error::ZeroAccumulator) => DMatrix::identity(points.nrows(), k),
        other => other?,
    };
    Ok(SubspaceEstimate {
        basis,
        diagnostics: FilterDiagnostics {
            survivors,
            restarts_run: restarts,
            inner_iterations: iterations,
            selected_restart: selected,
            removed_good: None,
            removed_corrupted: None,
            alpha_requested: alpha,
            alpha_used: alpha,
            n_points: points.ncols(),
        },
    })
}

/// [`robust_subspace`] with `alpha` clamped into `(0, 1/36]`; the requested
/// and used levels are both kept in the diagnostics.
pub fn robust_subspace_clamped(
    points: &DMatrix<f64>,
    k: usize,
    alpha: f64,
    nu: f64,
    delta: f64,
    seed: u64,
) -> Result<SubspaceEstimate> {
    let used = clamp_filter_alpha(alpha);
    let mut est = robust_subspace(points, k, used, nu, delta, seed)?;
    est.diagnostics.alpha_requested = alpha;
    Ok(est)
}
