//! Univariate robust location estimates.

use crate::error::{invalid, Error, Result};

/// Number of samples removed from each tail by a trimmed mean at level `eps`.
pub fn trim_count(n: usize, eps: f64) -> usize {
    (2.0 * eps * n as f64).ceil() as usize
}

/// Mean after removing `per_side` samples from each tail.
pub fn trimmed_mean_count(samples: &[f64], per_side: usize) -> Result<f64> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptyInput("no samples"));
    }
    if 2 * per_side >= n {
        return Err(invalid(
            "eps",
            format!("trimming {per_side} per side empties {n} samples"),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let kept = &sorted[per_side..n - per_side];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Trimmed mean at level `eps`: drop the `⌈2εn⌉` smallest and largest samples
/// and average the rest. Requires `eps ∈ (0, 1/8]` and `n ≥ max(8, 1/eps)`.
pub fn trimmed_mean(samples: &[f64], eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.125) {
        return Err(invalid("eps", format!("need 0 < eps <= 1/8, got {eps}")));
    }
    let n = samples.len();
    if (n as f64) < 8f64.max(1.0 / eps) {
        return Err(invalid(
            "samples",
            format!("need at least max(8, 1/eps) samples, got {n}"),
        ));
    }
    trimmed_mean_count(samples, trim_count(n, eps))
}

/// Trimmed mean for small or uncorrupted groups: the level is clamped to
/// `[1/n, 1/8]`, and groups with fewer than 8 samples or `eps = 0` get the
/// plain mean.
pub fn clamped_trimmed_mean(samples: &[f64], eps: f64) -> Result<f64> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptyInput("no samples"));
    }
    if eps <= 0.0 || n < 8 {
        return Ok(samples.iter().sum::<f64>() / n as f64);
    }
    trimmed_mean(samples, eps.clamp(1.0 / n as f64, 0.125))
}

/// Lower median (element at index `(n−1)/2` after sorting).
pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}
