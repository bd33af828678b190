//! Posterior over mixture components for a new task, MAP and posterior-mean
//! prediction, and Monte-Carlo prediction error.

use nalgebra::DVector;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::classification::FittedMeta;
use crate::error::{invalid, Error, Result};
use crate::model::{Batch, MetaParameter};
use crate::rng;

/// Noise variances below this are raised to it before taking logs.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub probs: Vec<f64>,
    /// Whether any component's noise variance was raised to [`VARIANCE_FLOOR`].
    pub floored: bool,
}

impl Posterior {
    /// Most probable component; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (l, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = l;
            }
        }
        best
    }
}

fn validate(theta: &FittedMeta, d: usize) -> Result<()> {
    let k = theta.k();
    if k == 0 || theta.p_hat.len() != k || theta.s2_hat.len() != k {
        return Err(invalid("theta", "inconsistent component counts"));
    }
    if let Some(w) = theta.w_hat.iter().find(|w| w.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: w.len(),
        });
    }
    if theta.p_hat.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(invalid("theta", "weights must be finite and non-negative"));
    }
    if theta.p_hat.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroWeights);
    }
    Ok(())
}

/// `P(ℓ | batch) ∝ p̂_ℓ Π_j N(y_j; x_jᵀŵ_ℓ, ŝ_ℓ²)`, normalized in log space.
pub fn posterior<B: AsRef<Batch>>(batch: &B, theta: &FittedMeta) -> Result<Posterior> {
    let b = batch.as_ref();
    validate(theta, b.dim())?;
    let t = b.len() as f64;
    let mut floored = false;
    let logs: Vec<f64> = (0..theta.k())
        .map(|l| {
            if theta.p_hat[l] == 0.0 {
                return f64::NEG_INFINITY;
            }
            let mut s2 = theta.s2_hat[l];
            if !(s2 >= VARIANCE_FLOOR) {
                s2 = VARIANCE_FLOOR;
                floored = true;
            }
            let ssr = (&b.labels - &b.covariates * &theta.w_hat[l]).norm_squared();
            theta.p_hat[l].ln()
                - 0.5 * t * (2.0 * std::f64::consts::PI * s2).ln()
                - ssr / (2.0 * s2)
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logs.iter().map(|&v| (v - top).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(Posterior {
        probs: unnorm.iter().map(|v| v / total).collect(),
        floored,
    })
}

fn check_query(theta: &FittedMeta, x: &DVector<f64>) -> Result<()> {
    let d = theta.w_hat.first().map(|w| w.len()).unwrap_or(0);
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: x.len(),
        });
    }
    Ok(())
}

/// `x_queryᵀ ŵ_{ℓ*}` for the most probable component `ℓ*`.
pub fn map_predict<B: AsRef<Batch>>(batch: &B, theta: &FittedMeta, x_query: &DVector<f64>) -> Result<f64> {
    check_query(theta, x_query)?;
    let post = posterior(batch, theta)?;
    Ok(x_query.dot(&theta.w_hat[post.argmax()]))
}

/// Posterior mean `Σ_ℓ P(ℓ | batch) x_queryᵀ ŵ_ℓ`.
pub fn bayes_predict<B: AsRef<Batch>>(batch: &B, theta: &FittedMeta, x_query: &DVector<f64>) -> Result<f64> {
    check_query(theta, x_query)?;
    let post = posterior(batch, theta)?;
    Ok(post
        .probs
        .iter()
        .zip(&theta.w_hat)
        .map(|(p, w)| p * x_query.dot(w))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionEval {
    pub mse_map: f64,
    pub mse_bayes: f64,
    /// Standard errors of the two means.
    pub se_map: f64,
    pub se_bayes: f64,
    /// `Σ_ℓ p_ℓ s_ℓ²` of the true mixture.
    pub noise_floor: f64,
    pub trials: usize,
}

/// Squared prediction error on fresh tasks: each trial draws a component,
/// `tau` training examples and one test example.
pub fn eval_prediction(
    meta: &MetaParameter,
    theta: &FittedMeta,
    tau: usize,
    trials: usize,
    seed: u64,
) -> Result<PredictionEval> {
    if tau == 0 || trials < 2 {
        return Err(invalid("trials", "need tau >= 1 and at least two trials"));
    }
    validate(theta, meta.dim())?;
    let d = meta.dim();
    let picker = WeightedIndex::new(meta.p().iter().copied()).map_err(|e| invalid("p", e.to_string()))?;
    let (mut sum_map, mut sq_map, mut sum_bayes, mut sq_bayes) = (0.0, 0.0, 0.0, 0.0);
    for trial in 0..trials {
        let mut rng = rng::stream_for(seed, &[trial as u64]);
        let z = picker.sample(&mut rng);
        let w = meta.w().column(z);
        let s = meta.s()[z];
        let mut x = nalgebra::DMatrix::zeros(tau, d);
        for i in 0..tau {
            for j in 0..d {
                x[(i, j)] = rng.sample(StandardNormal);
            }
        }
        let mut y = &x * w;
        for v in y.iter_mut() {
            *v += s * rng.sample::<f64, _>(StandardNormal);
        }
        let xq = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let yq = xq.dot(&w) + s * rng.sample::<f64, _>(StandardNormal);
        let batch = Batch {
            covariates: x,
            labels: y,
        };
        let post = posterior(&batch, theta)?;
        let map = xq.dot(&theta.w_hat[post.argmax()]);
        let bayes: f64 = post
            .probs
            .iter()
            .zip(&theta.w_hat)
            .map(|(p, w)| p * xq.dot(w))
            .sum();
        let em = (yq - map).powi(2);
        let eb = (yq - bayes).powi(2);
        sum_map += em;
        sq_map += em * em;
        sum_bayes += eb;
        sq_bayes += eb * eb;
    }
    let n = trials as f64;
    let se = |sum: f64, sq: f64| {
        let mean = sum / n;
        (((sq / n - mean * mean) * n / (n - 1.0)).max(0.0) / n).sqrt()
    };
    Ok(PredictionEval {
        mse_map: sum_map / n,
        mse_bayes: sum_bayes / n,
        se_map: se(sum_map, sq_map),
        se_bayes: se(sum_bayes, sq_bayes),
        noise_floor: meta.noise_floor(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn symmetric_theta() -> FittedMeta {
        FittedMeta {
            w_hat: vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![-1.0, 0.0])],
            s2_hat: vec![1.0, 1.0],
            p_hat: vec![0.5, 0.5],
            fallback: vec![false; 2],
            errors: None,
        }
    }

    #[test]
    fn single_component_is_certain() {
        let theta = FittedMeta {
            w_hat: vec![DVector::from_vec(vec![2.0, -1.0])],
            s2_hat: vec![0.5],
            p_hat: vec![1.0],
            fallback: vec![false],
            errors: None,
        };
        let b = Batch::new(DMatrix::identity(2, 2), DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(posterior(&b, &theta).unwrap().probs, vec![1.0]);
        let xq = DVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(map_predict(&b, &theta, &xq).unwrap(), 1.0);
        assert_eq!(bayes_predict(&b, &theta, &xq).unwrap(), 1.0);
    }

    #[test]
    fn equidistant_batch_is_uniform() {
        let b = Batch::new(DMatrix::from_row_slice(1, 2, &[0.0, 1.0]), DVector::zeros(1)).unwrap();
        let post = posterior(&b, &symmetric_theta()).unwrap();
        assert_eq!(post.probs, vec![0.5, 0.5]);
        let xq = DVector::from_vec(vec![3.0, 0.0]);
        assert_eq!(bayes_predict(&b, &symmetric_theta(), &xq).unwrap(), 0.0);
    }

    #[test]
    fn zero_weights_rejected() {
        let mut theta = symmetric_theta();
        theta.p_hat = vec![0.0, 0.0];
        let b = Batch::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert_eq!(posterior(&b, &theta).unwrap_err(), Error::ZeroWeights);
    }

    #[test]
    fn zero_variance_is_floored() {
        let mut theta = symmetric_theta();
        theta.s2_hat = vec![0.0, 1.0];
        let b = Batch::new(DMatrix::identity(2, 2), DVector::from_vec(vec![1.0, 0.0])).unwrap();
        let post = posterior(&b, &theta).unwrap();
        assert!(post.floored);
        assert!((post.probs[0] - 1.0).abs() < 1e-12);
    }
}
