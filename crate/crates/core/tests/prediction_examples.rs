//! Posterior, MAP and Bayes predictions against brute-force oracles.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use metamix::classification::FittedMeta;
use metamix::model::{sample_tasks, Batch, MetaParameter};
use metamix::prediction::{bayes_predict, eval_prediction, map_predict, posterior};
use metamix::rng;

fn theta(w: &[&[f64]], s2: &[f64], p: &[f64]) -> FittedMeta {
    FittedMeta {
        w_hat: w.iter().map(|v| DVector::from_column_slice(v)).collect(),
        s2_hat: s2.to_vec(),
        p_hat: p.to_vec(),
        fallback: vec![false; w.len()],
        errors: None,
    }
}

fn random_batch(d: usize, t: usize, seed: u64) -> Batch {
    let mut r = rng::stream(seed, 0);
    let x = DMatrix::from_fn(t, d, |_, _| r.sample::<f64, _>(StandardNormal));
    let y = DVector::from_fn(t, |_, _| 2.0 * r.sample::<f64, _>(StandardNormal));
    Batch::new(x, y).unwrap()
}

/// Posterior by multiplying densities directly, without logs.
fn direct_posterior(batch: &Batch, th: &FittedMeta) -> Vec<f64> {
    let weights: Vec<f64> = (0..th.k())
        .map(|l| {
            let resid = &batch.labels - &batch.covariates * &th.w_hat[l];
            let s2 = th.s2_hat[l];
            resid.iter().fold(th.p_hat[l], |acc, r| {
                acc * (-r * r / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt()
            })
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

#[test]
fn posterior_matches_direct_product() {
    let th = theta(&[&[1.0, 0.0, 0.5], &[-0.5, 1.0, 0.0], &[0.0, 0.3, -1.0]], &[1.0, 2.0, 0.7], &[0.2, 0.5, 0.3]);
    for t in 1..=5 {
        let batch = random_batch(3, t, t as u64);
        let got = posterior(&batch, &th).unwrap();
        for (a, b) in got.probs.iter().zip(direct_posterior(&batch, &th)) {
            assert!((a - b).abs() < 1e-10, "t = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn concentrated_posterior_makes_map_and_bayes_agree() {
    let th = theta(&[&[3.0, 0.0], &[-3.0, 0.0]], &[0.25, 0.25], &[0.5, 0.5]);
    let w = DMatrix::from_column_slice(2, 1, &[3.0, 0.0]);
    let meta = MetaParameter::uniform(w, 0.5).unwrap();
    let task = &sample_tasks(&meta, 1, 10, 2).unwrap()[0];
    let post = posterior(task, &th).unwrap();
    assert!(post.probs[0] - post.probs[1] >= 0.99);
    let xq = DVector::from_vec(vec![0.7, -1.1]);
    let map = map_predict(task, &th, &xq).unwrap();
    let bayes = bayes_predict(task, &th, &xq).unwrap();
    assert!((map - bayes).abs() <= 0.02 * map.abs());
}

#[test]
fn noiseless_batch_uses_its_component() {
    let th = theta(&[&[5.0, 0.0], &[0.0, 5.0]], &[0.1, 0.1], &[0.5, 0.5]);
    let meta = MetaParameter::uniform(DMatrix::from_column_slice(2, 1, &[0.0, 5.0]), 0.0).unwrap();
    let task = &sample_tasks(&meta, 1, 4, 3).unwrap()[0];
    let xq = DVector::from_vec(vec![1.0, 2.0]);
    assert_eq!(map_predict(task, &th, &xq).unwrap(), xq.dot(&th.w_hat[1]));
}

#[test]
fn bayes_prediction_is_exact_posterior_mean() {
    let th = theta(&[&[1.0, 2.0], &[-1.0, 0.5], &[0.0, -2.0]], &[1.0, 0.5, 2.0], &[0.3, 0.3, 0.4]);
    let batch = random_batch(2, 3, 9);
    let xq = DVector::from_vec(vec![0.4, -0.8]);
    let probs = direct_posterior(&batch, &th);
    let oracle: f64 = probs.iter().zip(&th.w_hat).map(|(p, w)| p * xq.dot(w)).sum();
    assert!((bayes_predict(&batch, &th, &xq).unwrap() - oracle).abs() < 1e-10);

    let sym = theta(&[&[1.0, 0.0], &[-1.0, 0.0]], &[1.0, 1.0], &[0.5, 0.5]);
    let empty_signal = Batch::new(DMatrix::from_row_slice(1, 2, &[0.0, 1.0]), DVector::from_vec(vec![0.3])).unwrap();
    assert!(bayes_predict(&empty_signal, &sym, &DVector::from_vec(vec![2.0, 0.0])).unwrap().abs() < 1e-12);
}

#[test]
fn noiseless_exact_theta_has_zero_error() {
    let meta = MetaParameter::uniform(DMatrix::from_column_slice(2, 2, &[2.0, 0.0, -2.0, 0.0]), 0.0).unwrap();
    let eval = eval_prediction(&meta, &FittedMeta::from_meta(&meta), 8, 500, 1).unwrap();
    assert!(eval.mse_map <= 1e-12 && eval.mse_bayes <= 1e-12);
}

#[test]
fn exact_theta_beats_swapped_center_and_respects_floor() {
    let meta = MetaParameter::uniform(DMatrix::from_column_slice(3, 2, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0]), 1.0).unwrap();
    let exact = FittedMeta::from_meta(&meta);
    let mut swapped = exact.clone();
    swapped.w_hat[1] = DVector::from_vec(vec![0.0, 0.0, 2.0]);
    let trials = 4000;
    let good = eval_prediction(&meta, &exact, 20, trials, 6).unwrap();
    let bad = eval_prediction(&meta, &swapped, 20, trials, 6).unwrap();
    assert!(bad.mse_map > good.mse_map && bad.mse_bayes > good.mse_bayes);
    assert!(good.mse_map >= good.noise_floor - 3.0 * good.se_map);
    assert!(good.mse_bayes >= good.noise_floor - 3.0 * good.se_bayes);
}

proptest! {
    #[test]
    fn posterior_is_normalized(
        seed in any::<u64>(),
        t in 1usize..40,
        scale in 0.01f64..100.0,
    ) {
        let th = theta(&[&[1.0, 0.0], &[-1.0, 0.5], &[0.0, 3.0]], &[scale, 1.0, 1e-6], &[0.1, 0.6, 0.3]);
        let batch = random_batch(2, t, seed);
        let post = posterior(&batch, &th).unwrap();
        let total: f64 = post.probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(post.probs.iter().all(|p| p.is_finite() && *p >= 0.0));
    }
}
