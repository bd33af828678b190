//! Monte-Carlo checks of the moment facts behind heavy-task clustering.
//!
//! * [`sos_moment_check`]: directional `2m`-th moments of `β̂ − β` against
//!   the bound `ρ^{2m} (2m)^m C^m / t^m` with `C = e⁶`.
//! * [`second_moment_identity`]: `E[β̂β̂ᵀ] = (1 + 1/t)ββᵀ + ((‖β‖² + σ²)/t) I`.
//! * [`chi_square_check`]: for one example, `(vᵀx) y` has the law of
//!   `a Z₁² + b Z₂²` with `a, b = (vᵀβ ± ‖v‖σ_y)/2`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::model::{sample_tasks, MetaParameter};
use crate::rng::{self, StreamRng};

/// Constant in the directional moment bound.
pub fn moment_constant() -> f64 {
    6f64.exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEntry {
    pub m: usize,
    pub direction: usize,
    pub empirical: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub entries: Vec<MomentEntry>,
    pub max_ratio: f64,
    pub passed: bool,
}

fn random_unit(rng: &mut StreamRng, d: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Directional moments of `β̂_i − β_i` over `n` clean tasks of size `t`.
pub fn sos_moment_check(
    meta: &MetaParameter,
    t: usize,
    n: usize,
    m_max: usize,
    n_directions: usize,
    seed: u64,
) -> Result<MomentReport> {
    if m_max == 0 {
        return Err(invalid("m_max", "need m_max >= 1"));
    }
    if t < 2 * m_max {
        return Err(invalid("t", format!("need t >= 2 m_max = {}, got {t}", 2 * m_max)));
    }
    if n_directions == 0 {
        return Err(invalid("n_directions", "need at least one direction"));
    }
    let tasks = sample_tasks(meta, n, t, rng::combine(&[seed, 0]))?;
    let d = meta.dim();
    let mut deviations = DMatrix::zeros(d, n);
    for (i, task) in tasks.iter().enumerate() {
        let z = task.component().expect("sampled tasks carry truth");
        deviations.set_column(i, &(task.batch.moment_estimate() - meta.w().column(z)));
    }
    let mut dir_rng = rng::stream(seed, 1);
    let directions: Vec<DVector<f64>> =
        (0..n_directions).map(|_| random_unit(&mut dir_rng, d)).collect();
    let rho = meta.rho();
    let c = moment_constant();
    let mut entries = Vec::new();
    for (j, v) in directions.iter().enumerate() {
        let proj = v.tr_mul(&deviations);
        for m in 1..=m_max {
            let empirical = proj.iter().map(|p| p.powi(2 * m as i32)).sum::<f64>() / n as f64;
            let mf = m as f64;
            let bound = rho.powi(2 * m as i32) * (2.0 * mf).powf(mf) * c.powf(mf) / (t as f64).powf(mf);
            let ratio = if empirical == 0.0 { 0.0 } else { empirical / bound };
            entries.push(MomentEntry {
                m,
                direction: j,
                empirical,
                bound,
                ratio,
            });
        }
    }
    let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    Ok(MomentReport {
        passed: max_ratio <= 1.0,
        entries,
        max_ratio,
    })
}

/// Entrywise comparison of a Monte-Carlo average to its expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub empirical: DMatrix<f64>,
    pub expected: DMatrix<f64>,
    pub std_error: DMatrix<f64>,
    /// Largest `|empirical − expected| / std_error`, zero entries skipped.
    pub max_z: f64,
}

impl IdentityCheck {
    fn finish(empirical: DMatrix<f64>, expected: DMatrix<f64>, std_error: DMatrix<f64>) -> Self {
        let mut max_z: f64 = 0.0;
        for ((e, x), s) in empirical.iter().zip(expected.iter()).zip(std_error.iter()) {
            let gap = (e - x).abs();
            if *s > 0.0 {
                max_z = max_z.max(gap / s);
            } else if gap > 0.0 {
                max_z = f64::INFINITY;
            }
        }
        Self {
            empirical,
            expected,
            std_error,
            max_z,
        }
    }

    pub fn within(&self, z: f64) -> bool {
        self.max_z <= z
    }
}

/// `E[β̂β̂ᵀ]` for `β̂ = (1/t) Xᵀy` with `y = Xβ + σε`, estimated from
/// `reps` replicates.
pub fn second_moment_identity(
    beta: &DVector<f64>,
    sigma: f64,
    t: usize,
    reps: usize,
    seed: u64,
) -> Result<IdentityCheck> {
    if t == 0 || reps < 2 {
        return Err(invalid("reps", "need t >= 1 and at least two replicates"));
    }
    if beta.is_empty() {
        return Err(Error::EmptyInput("beta has no coordinates"));
    }
    let d = beta.len();
    let mut rng = rng::stream(seed, 0);
    let mut sum = DMatrix::zeros(d, d);
    let mut sum_sq = DMatrix::zeros(d, d);
    let mut x = DVector::zeros(d);
    for _ in 0..reps {
        let mut est = DVector::zeros(d);
        for _ in 0..t {
            for v in x.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let e: f64 = rng.sample(StandardNormal);
            let y = beta.dot(&x) + sigma * e;
            est.axpy(y, &x, 1.0);
        }
        est /= t as f64;
        let outer = &est * est.transpose();
        sum_sq += outer.component_mul(&outer);
        sum += outer;
    }
    let r = reps as f64;
    let mean = &sum / r;
    let var = (&sum_sq / r - mean.component_mul(&mean)) * (r / (r - 1.0));
    let std_error = var.map(|v| (v.max(0.0) / r).sqrt());
    let tf = t as f64;
    let expected = beta * beta.transpose() * (1.0 + 1.0 / tf)
        + DMatrix::identity(d, d) * ((beta.norm_squared() + sigma * sigma) / tf);
    Ok(IdentityCheck::finish(mean, expected, std_error))
}

/// First four raw moments of `a Z₁² + b Z₂²` from its cumulants
/// `κ_n = 2^{n−1} (n−1)! (aⁿ + bⁿ)`.
pub fn chi_square_moments(a: f64, b: f64) -> [f64; 4] {
    let k1 = a + b;
    let k2 = 2.0 * (a * a + b * b);
    let k3 = 8.0 * (a.powi(3) + b.powi(3));
    let k4 = 48.0 * (a.powi(4) + b.powi(4));
    [
        k1,
        k2 + k1 * k1,
        k3 + 3.0 * k2 * k1 + k1.powi(3),
        k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 + k1.powi(4),
    ]
}

/// Raw moments of `(vᵀx) y` for one example against the χ² mixture.
pub fn chi_square_check(
    beta: &DVector<f64>,
    sigma: f64,
    v: &DVector<f64>,
    reps: usize,
    seed: u64,
) -> Result<IdentityCheck> {
    if v.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            expected: beta.len(),
            actual: v.len(),
        });
    }
    if reps < 2 {
        return Err(invalid("reps", "need at least two replicates"));
    }
    let d = beta.len();
    let mut rng = rng::stream(seed, 0);
    let mut sums = [0.0f64; 4];
    let mut sums_sq = [0.0f64; 4];
    let mut x = DVector::zeros(d);
    for _ in 0..reps {
        for c in x.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let e: f64 = rng.sample(StandardNormal);
        let w = v.dot(&x) * (beta.dot(&x) + sigma * e);
        let mut p = 1.0;
        for j in 0..4 {
            p *= w;
            sums[j] += p;
            sums_sq[j] += p * p;
        }
    }
    let r = reps as f64;
    let sigma_y = (beta.norm_squared() + sigma * sigma).sqrt();
    let vb = v.dot(beta);
    let spread = v.norm() * sigma_y;
    let exact = chi_square_moments((vb + spread) / 2.0, (vb - spread) / 2.0);
    let empirical = DMatrix::from_fn(4, 1, |j, _| sums[j] / r);
    let std_error = DMatrix::from_fn(4, 1, |j, _| {
        let mean = sums[j] / r;
        let var = (sums_sq[j] / r - mean * mean) * r / (r - 1.0);
        (var.max(0.0) / r).sqrt()
    });
    let expected = DMatrix::from_column_slice(4, 1, &exact);
    Ok(IdentityCheck::finish(empirical, expected, std_error))
}
