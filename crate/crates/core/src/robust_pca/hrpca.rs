//! One-point-per-round robust PCA baseline.
//!
//! Each round computes the top-`k` subspace of the surviving points, scores
//! the round by the trimmed mean of projected energies, and deletes one
//! point drawn with probability proportional to its energy. The best-scoring
//! round's subspace is returned.

use nalgebra::DMatrix;
use rand::Rng;

use super::{FilterDiagnostics, SubspaceEstimate};
use crate::error::{invalid, Result};
use crate::linalg;
use crate::rng;

/// Rebuild the running accumulator from scratch this often to bound drift.
const REFRESH_EVERY: usize = 256;

/// Everything the baseline did, round by round.
#[derive(Debug, Clone, PartialEq)]
pub struct HrpcaTrace {
    /// Points in deletion order; length `⌊n/2⌋`.
    pub removal_order: Vec<usize>,
    /// Trimmed captured energy of each round's candidate.
    pub round_values: Vec<f64>,
    /// Round whose candidate won (number of deletions before it).
    pub selected_round: usize,
    pub estimate: SubspaceEstimate,
}

/// Run the baseline and keep the full trace.
pub fn hrpca_trace(points: &DMatrix<f64>, k: usize, alpha: f64, seed: u64) -> Result<HrpcaTrace> {
    let (d, n) = points.shape();
    if !(0.0..0.25).contains(&alpha) {
        return Err(invalid("alpha", format!("need 0 <= alpha < 1/4, got {alpha}")));
    }
    if k == 0 || k > d {
        return Err(invalid("k", format!("need 1 <= k <= d = {d}, got {k}")));
    }
    if n < 2 || n < k {
        return Err(invalid("points", format!("need at least max(2, k) points, got {n}")));
    }
    let rounds = n / 2;
    let drop_top = (alpha * n as f64).ceil() as usize;
    let mut rng = rng::stream(seed, 0);
    let mut active = vec![true; n];
    let mut acc = linalg::second_moment_sum(points, None);
    let mut removal_order = Vec::with_capacity(rounds);
    let mut round_values = Vec::with_capacity(rounds);
    let mut best: Option<(f64, usize, DMatrix<f64>)> = None;
    let mut scores = vec![0.0; n];
    for round in 0..rounds {
        if round > 0 && round % REFRESH_EVERY == 0 {
            let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
            acc = linalg::second_moment_sum(points, Some(&idx));
        }
        let basis = match linalg::top_k_eigenbasis(&acc, k) {
            Err(crate::Error::ZeroAccumulator) => DMatrix::identity(d, k),
            other => other?,
        };
        let proj = basis.tr_mul(points);
        let mut live = Vec::with_capacity(n - round);
        for i in 0..n {
            scores[i] = if active[i] {
                let s = proj.column(i).norm_squared();
                live.push(s);
                s
            } else {
                0.0
            };
        }
        // Mean of the live scores without the `drop_top` largest; partial
        // selection keeps each round linear.
        let drop = drop_top.min(live.len() - 1);
        if drop > 0 {
            live.select_nth_unstable_by(drop - 1, |a, b| b.total_cmp(a));
        }
        let tail = &live[drop..];
        let value = tail.iter().sum::<f64>() / tail.len() as f64;
        round_values.push(value);
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, round, basis));
        }
        let total: f64 = scores.iter().sum();
        let victim = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &s) in scores.iter().enumerate() {
                if s > 0.0 {
                    pick = Some(i);
                    if target < s {
                        break;
                    }
                    target -= s;
                }
            }
            pick.expect("positive total has a positive score")
        } else {
            let alive: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
            alive[rng.random_range(0..alive.len())]
        };
        active[victim] = false;
        let p = points.column(victim);
        acc -= p * p.transpose();
        removal_order.push(victim);
    }
    let (_, selected_round, basis) = best.expect("at least one round");
    let mut kept = vec![true; n];
    for &i in &removal_order[..selected_round] {
        kept[i] = false;
    }
    let survivors = (0..n).filter(|&i| kept[i]).collect();
    Ok(HrpcaTrace {
        removal_order,
        round_values,
        selected_round,
        estimate: SubspaceEstimate {
            basis,
            diagnostics: FilterDiagnostics {
                survivors,
                restarts_run: 1,
                inner_iterations: vec![rounds],
                selected_restart: 0,
                removed_good: None,
                removed_corrupted: None,
                alpha_requested: alpha,
                alpha_used: alpha,
                n_points: n,
            },
        },
    })
}

/// Baseline subspace estimate; see [`hrpca_trace`].
pub fn hrpca(points: &DMatrix<f64>, k: usize, alpha: f64, seed: u64) -> Result<SubspaceEstimate> {
    hrpca_trace(points, k, alpha, seed).map(|t| t.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_half_the_points_once_each() {
        let pts = DMatrix::from_fn(3, 41, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let trace = hrpca_trace(&pts, 1, 0.02, 9).unwrap();
        assert_eq!(trace.removal_order.len(), 20);
        let mut sorted = trace.removal_order.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 20);
        assert_eq!(
            trace.estimate.diagnostics.survivors.len(),
            41 - trace.selected_round
        );
        assert!(linalg::orthonormality_error(&trace.estimate.basis) < 1e-10);
    }

    #[test]
    fn rejects_tiny_inputs() {
        let pts = DMatrix::from_element(2, 1, 1.0);
        assert!(hrpca(&pts, 1, 0.0, 0).is_err());
    }
}
