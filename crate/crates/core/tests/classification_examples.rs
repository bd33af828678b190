//! Classification, robust regression and refinement against oracles.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use metamix::classification::{classify, ols, refine, trimmed_least_squares, DEFAULT_TLS_ROUNDS};
use metamix::clustering::ClusterModel;
use metamix::model::{sample_tasks, Batch, MetaParameter};
use metamix::rng;

fn gaussian_design(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng::stream(seed, 0);
    DMatrix::from_fn(n, d, |_, _| r.sample::<f64, _>(StandardNormal))
}

fn noise(n: usize, sigma: f64, seed: u64) -> DVector<f64> {
    let mut r = rng::stream(seed, 1);
    DVector::from_fn(n, |_, _| sigma * r.sample::<f64, _>(StandardNormal))
}

fn model_from(meta: &MetaParameter) -> ClusterModel {
    let centers = meta.w().column_iter().map(|c| c.into_owned()).collect();
    let radii = meta.s().iter().map(|s| s * s).collect();
    ClusterModel::new(centers, radii, Vec::new()).unwrap()
}

#[test]
fn separated_tasks_are_classified_correctly() {
    let (d, k, n, delta) = (8, 3, 1000, 0.01f64);
    let w = DMatrix::from_fn(d, k, |i, j| if i == j { 2.0 } else { 0.0 });
    let meta = MetaParameter::uniform(w, 0.5).unwrap();
    let (rho, sep) = (meta.rho(), meta.delta());
    assert!(sep / rho >= 1.0);
    let t = (64.0 * (rho / sep).powi(4) * ((k * n) as f64 / delta).ln()).ceil() as usize;
    let tasks = sample_tasks(&meta, n, t, 4).unwrap();
    let model = model_from(&meta);
    let wrong = tasks
        .iter()
        .filter(|task| Some(classify(task, &model)) != task.component())
        .count();
    assert!(wrong as f64 / n as f64 <= delta, "{wrong} misclassified at t = {t}");
}

#[test]
fn classification_ignores_example_order() {
    let meta = MetaParameter::uniform(DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, -1.0, 0.5, 0.0]), 1.0).unwrap();
    let model = model_from(&meta);
    for (i, task) in sample_tasks(&meta, 50, 6, 8).unwrap().iter().enumerate() {
        let mut order: Vec<usize> = (0..6).collect();
        order.shuffle(&mut rng::stream(i as u64, 2));
        let permuted = Batch::new(
            task.batch.covariates.select_rows(&order),
            DVector::from_iterator(6, order.iter().map(|&j| task.batch.labels[j])),
        )
        .unwrap();
        assert_eq!(classify(task, &model), classify(&permuted, &model));
    }
}

#[test]
fn noiseless_regression_is_exact() {
    let x = gaussian_design(60, 5, 1);
    let w = DVector::from_vec(vec![1.0, -2.0, 0.0, 3.5, 0.25]);
    let y = &x * &w;
    let got = trimmed_least_squares(&x, &y, 0.1, DEFAULT_TLS_ROUNDS).unwrap();
    assert!((got - w).norm() < 1e-8);
}

#[test]
fn trimmed_regression_matches_ols_rate_on_clean_data() {
    let d = 10;
    let n = 20 * d;
    let w = DVector::from_element(d, 0.5);
    let (mut sq, mut sq_ols) = (0.0, 0.0);
    let seeds = 20;
    for seed in 0..seeds {
        let x = gaussian_design(n, d, seed);
        let y = &x * &w + noise(n, 1.0, seed);
        let got = trimmed_least_squares(&x, &y, 0.05, DEFAULT_TLS_ROUNDS).unwrap();
        sq += (got - &w).norm_squared();
        sq_ols += (ols(&x, &y).unwrap() - &w).norm_squared();
    }
    let rms = (sq / seeds as f64).sqrt();
    let oracle = (sq_ols / seeds as f64).sqrt();
    // Same-data OLS; its expected squared error σ²d/(n−d−1) is the scale √(d/n) up to lower order.
    assert!((oracle / (d as f64 / n as f64).sqrt() - 1.0).abs() <= 0.2, "ols rms {oracle}");
    assert!(rms <= 1.2 * oracle, "rms {rms} vs {oracle}");
}

#[test]
fn trimmed_regression_survives_gross_label_corruption() {
    let d = 10;
    let n = 20 * d;
    let w = DVector::from_element(d, 0.5);
    for seed in 0..20 {
        let x = gaussian_design(n, d, 100 + seed);
        let y = &x * &w + noise(n, 1.0, 100 + seed);
        let clean_err = (ols(&x, &y).unwrap() - &w).norm();
        let mut bad = y.clone();
        for i in 0..n / 20 {
            bad[i * 20] = 1e3;
        }
        let robust = (trimmed_least_squares(&x, &bad, 0.05, DEFAULT_TLS_ROUNDS).unwrap() - &w).norm();
        let plain = (ols(&x, &bad).unwrap() - &w).norm();
        assert!(robust <= 5.0 * clean_err, "seed {seed}: robust {robust} vs clean {clean_err}");
        assert!(plain >= 50.0 * clean_err, "seed {seed}: plain {plain} vs clean {clean_err}");
    }
}

#[test]
fn refinement_recovers_well_separated_mixture() {
    let d = 16;
    let mut w = DMatrix::zeros(d, 2);
    w[(0, 0)] = 3.0;
    w[(1, 1)] = 3.0;
    let meta = MetaParameter::uniform(w, 1.0).unwrap();
    let light2 = sample_tasks(&meta, 2000, 25, 41).unwrap();
    let mut coarse = model_from(&meta);
    for c in coarse.centers.iter_mut() {
        c[2] += 0.2;
    }
    coarse.radii = vec![1.04, 1.04];
    let mut fitted = refine(&light2, &coarse, 0.0).unwrap();
    let total: f64 = fitted.p_hat.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    for e in fitted.evaluate(&meta).unwrap() {
        assert!(e.w_rel <= 0.1 && e.s2_rel <= 0.1 && e.p_abs <= 0.05, "{e:?}");
    }
}

#[test]
fn noiseless_refinement_is_exact_and_scale_covariant() {
    let d = 4;
    let w = DMatrix::from_column_slice(d, 2, &[2.0, 0.0, 0.0, 0.0, 0.0, -2.0, 1.0, 0.0]);
    let meta = MetaParameter::uniform(w.clone(), 0.0).unwrap();
    let tasks: Vec<Batch> = sample_tasks(&meta, 400, 10, 5).unwrap().into_iter().map(|t| t.batch).collect();
    let model = ClusterModel::new(meta.w().column_iter().map(|c| c.into_owned()).collect(), vec![0.01, 0.01], Vec::new()).unwrap();
    let base = refine(&tasks, &model, 0.0).unwrap();
    for (l, wl) in meta.w().column_iter().enumerate() {
        assert!((&base.w_hat[l] - wl).norm() <= 1e-6);
        assert!(base.s2_hat[l] <= 1e-6);
    }
    let c = 3.0;
    let scaled_tasks: Vec<Batch> = tasks
        .iter()
        .map(|b| Batch::new(b.covariates.clone(), &b.labels * c).unwrap())
        .collect();
    let scaled_model = ClusterModel::new(
        model.centers.iter().map(|v| v * c).collect(),
        model.radii.iter().map(|r| r * c * c).collect(),
        Vec::new(),
    )
    .unwrap();
    let scaled = refine(&scaled_tasks, &scaled_model, 0.0).unwrap();
    for l in 0..2 {
        assert!((&scaled.w_hat[l] - &base.w_hat[l] * c).norm() <= 1e-9);
        assert!((scaled.s2_hat[l] - base.s2_hat[l] * c * c).abs() <= 1e-9);
        assert_eq!(scaled.p_hat[l], base.p_hat[l]);
    }
}
