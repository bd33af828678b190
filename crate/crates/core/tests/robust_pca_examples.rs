//! Oracle comparisons for subspace estimation, the baseline and the metrics.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use metamix::linalg::{max_principal_angle, projector, top_k_eigenbasis};
use metamix::model::{figure2_points, figure2_second_moment, MetaParameter};
use metamix::rng;
use metamix::robust_pca::{
    double_filter, hrpca_trace, rank_one_scores, robust_subspace, robust_subspace_clamped,
    subspace_metrics, top_k_subspace, MIN_FILTER_ALPHA,
};

fn gaussian(d: usize, n: usize, spike: &[f64], seed: u64) -> DMatrix<f64> {
    let mut r = rng::stream(seed, 0);
    DMatrix::from_fn(d, n, |i, _| {
        let scale = (1.0 + spike.get(i).copied().unwrap_or(0.0)).sqrt();
        scale * r.sample::<f64, _>(StandardNormal)
    })
}

fn random_orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng::stream(seed, 1);
    DMatrix::from_fn(d, d, |_, _| r.sample::<f64, _>(StandardNormal)).qr().q()
}

#[test]
fn scores_match_dense_trace() {
    let mut r = rng::stream(3, 0);
    let p = DMatrix::from_fn(7, 5, |_, _| r.sample::<f64, _>(StandardNormal));
    let u = random_orthogonal(7, 4).columns(0, 3).into_owned();
    let scores = rank_one_scores(&p, &u).unwrap();
    for (j, s) in scores.iter().enumerate() {
        let col = p.column(j);
        let outer = &col * col.transpose();
        let oracle = (u.transpose() * outer * &u).trace();
        assert!((s - oracle).abs() < 1e-12);
    }
}

#[test]
fn repeated_eigenvalue_span_matches_construction() {
    let q = random_orthogonal(6, 8);
    let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 3.0, 1.0, 0.5, 0.2, 0.1]));
    let acc = &q * diag * q.transpose();
    let u = top_k_eigenbasis(&acc, 2).unwrap();
    let oracle = q.columns(0, 2).into_owned();
    assert!((projector(&u) - projector(&oracle)).abs().max() < 1e-8);
}

#[test]
fn far_outlier_survives_no_seed() {
    let mut pts = gaussian(3, 300, &[], 2);
    pts.column_mut(17).fill(1e3);
    for seed in 0..100 {
        let step = double_filter(&pts, 1, 0.01, 1.0, seed).unwrap();
        assert!(step.cap.is_some());
        assert!(step.survivors.binary_search(&17).is_err(), "seed {seed}");
    }
}

#[test]
fn clean_data_tracks_oracle_pca() {
    let (d, k) = (6, 2);
    let spike = [2.0, 1.0];
    let mut angles = Vec::new();
    for n in [50 * d * k * k, 8 * 50 * d * k * k] {
        let pts = gaussian(d, n, &spike, n as u64);
        let oracle = top_k_subspace(&pts, k).unwrap();
        let est = robust_subspace_clamped(&pts, k, 0.0, 2f64.sqrt() * 3.0, 0.1, 5).unwrap();
        assert_eq!(est.diagnostics.alpha_used, MIN_FILTER_ALPHA);
        let angle = max_principal_angle(&est.basis, &oracle);
        assert!(angle <= 0.05, "n = {n}: angle {angle}");
        // Against the population subspace the error must shrink with n.
        let truth = DMatrix::identity(d, k);
        angles.push(max_principal_angle(&est.basis, &truth));
    }
    assert!(angles[1] < angles[0], "{angles:?}");
}

#[test]
fn restarts_are_deterministic() {
    let sample = figure2_points(10, 0.02, 3000, 6).unwrap();
    let a = robust_subspace(&sample.observed, 1, 0.02, 1.5, 0.1, 9).unwrap();
    let b = robust_subspace(&sample.observed, 1, 0.02, 1.5, 0.1, 9).unwrap();
    assert_eq!(a, b);
}

#[test]
fn baseline_on_clean_data_matches_oracle() {
    let sigma = figure2_second_moment(10);
    let mut w = DMatrix::zeros(10, 1);
    w[(0, 0)] = 0.1f64.sqrt();
    let meta = MetaParameter::uniform(w, 1.0).unwrap();
    let sample = figure2_points(10, 0.0, 4000, 12).unwrap();
    let oracle = top_k_subspace(&sample.clean, 1).unwrap();
    let trace = hrpca_trace(&sample.observed, 1, 0.0, 13).unwrap();
    assert_eq!(trace.removal_order.len(), 2000);
    let mut sorted = trace.removal_order.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), 2000);
    let got = subspace_metrics(&trace.estimate.basis, &meta, Some(&sigma)).unwrap();
    let best = subspace_metrics(&oracle, &meta, Some(&sigma)).unwrap();
    assert!((got.captured_variance - best.captured_variance).abs() <= 0.02);
}

#[test]
fn variance_gap_within_guarantee_shape() {
    let sigma = figure2_second_moment(10);
    let mut w = DMatrix::zeros(10, 1);
    w[(0, 0)] = 0.1f64.sqrt();
    let meta = MetaParameter::uniform(w, 1.0).unwrap();
    let nu = 2f64.sqrt() * 1.1;
    let top = 1.1;
    for (i, alpha) in [0.005, 0.01, 0.015, 0.02, 0.025].into_iter().enumerate() {
        let sample = figure2_points(10, alpha, 10_000, 40 + i as u64).unwrap();
        let est = robust_subspace(&sample.observed, 1, alpha, nu, 0.1, 41).unwrap();
        let m = subspace_metrics(&est.basis, &meta, Some(&sigma)).unwrap();
        let gap = top - m.captured_variance;
        let bound = 48.0 * alpha * top + 110.0 * nu * alpha.sqrt();
        assert!(gap <= bound, "alpha {alpha}: gap {gap} > {bound}");
    }
}
