//! Monte-Carlo and oracle checks of the generative model and instance
//! generators.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use metamix::model::{
    derived_stats, figure2_points, lower_bound_points, make_splits, rank_one_statistics,
    sample_tasks, AdversaryConfig, MetaParameter, SplitAdversaries, SplitSizes, Strategy,
};
use metamix::rng;

#[test]
fn smallest_positive_eigenvalue_matches_singular_values() {
    let mut r = rng::stream(11, 0);
    let mut w = DMatrix::from_fn(8, 3, |_, _| r.sample::<f64, _>(StandardNormal));
    for mut c in w.column_iter_mut() {
        let norm = c.norm();
        c /= norm;
    }
    let meta = MetaParameter::uniform(w.clone(), 1.0).unwrap();
    let stats = derived_stats(&meta).unwrap();
    // Σ p w wᵀ = B Bᵀ with B = W diag(√p); its nonzero eigenvalues are the
    // squared singular values of B.
    let b = &w * (1.0f64 / 3.0).sqrt();
    let oracle = b
        .singular_values()
        .iter()
        .map(|s| s * s)
        .fold(f64::INFINITY, f64::min);
    assert!((stats.sigma_min - oracle).abs() < 1e-12, "{} vs {oracle}", stats.sigma_min);
}

#[test]
fn rank_one_second_moment_identity() {
    let d = 4;
    let mut w = DMatrix::zeros(d, 1);
    w[(0, 0)] = 1.0;
    let meta = MetaParameter::uniform(w, 1.0).unwrap();
    let n = 10_000;
    let points = rank_one_statistics(&sample_tasks(&meta, n, 1, 3).unwrap());
    let expected = meta.rank_one_second_moment();
    let mut expected_hand = DMatrix::<f64>::identity(d, d) * 2.0;
    expected_hand[(0, 0)] += 2.0;
    assert!((&expected - &expected_hand).abs().max() < 1e-12);
    for a in 0..d {
        for b in 0..d {
            let vals: Vec<f64> = points.column_iter().map(|p| p[a] * p[b]).collect();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let z = (mean - expected[(a, b)]).abs() / (var / n as f64).sqrt();
            assert!(z < 5.0, "entry ({a},{b}): mean {mean}, z {z}");
        }
    }
}

#[test]
fn component_frequencies_concentrate() {
    let w = DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, -1.0, -1.0]);
    let p = DVector::from_vec(vec![0.2, 0.3, 0.5]);
    let meta = MetaParameter::new(w, DVector::from_element(3, 1.0), p.clone()).unwrap();
    let n = 20_000;
    let tasks = sample_tasks(&meta, n, 1, 9).unwrap();
    for l in 0..3 {
        let freq = tasks.iter().filter(|t| t.component() == Some(l)).count() as f64 / n as f64;
        let tol = 3.0 * (p[l] * (1.0 - p[l]) / n as f64).sqrt();
        assert!((freq - p[l]).abs() <= tol, "component {l}: {freq} vs {}", p[l]);
    }
}

#[test]
fn identical_seeds_give_identical_splits() {
    let meta = MetaParameter::uniform(DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]), 0.5).unwrap();
    let sizes = SplitSizes {
        n_light1: 100,
        t_light1: 1,
        n_heavy: 50,
        t_heavy: 20,
        n_light2: 200,
        t_light2: 5,
    };
    let adv = SplitAdversaries {
        light1: AdversaryConfig::new(Strategy::large_leverage(), 0.05),
        heavy: AdversaryConfig::new(Strategy::ClusterKill, 0.1),
        light2: AdversaryConfig::new(Strategy::boundary(), 0.05),
    };
    let a = make_splits(&meta, &sizes, &adv, 77).unwrap();
    let b = make_splits(&meta, &sizes, &adv, 77).unwrap();
    assert_eq!(a, b);
    let c = make_splits(&meta, &sizes, &adv, 78).unwrap();
    assert_ne!(a, c);
}

#[test]
fn spiked_clean_law_moments() {
    let n = 100_000;
    let sample = figure2_points(10, 0.0, n, 21).unwrap();
    assert!(sample.corrupted.iter().all(|&b| !b));
    let x1: Vec<f64> = sample.clean.row(0).iter().copied().collect();
    let x2: Vec<f64> = sample.clean.row(1).iter().copied().collect();
    let var1 = x1.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let tol_var = 3.0 * 1.1 * (2.0 / n as f64).sqrt();
    assert!((var1 - 1.1).abs() <= tol_var, "Var(x1) = {var1}");
    let cross = x1.iter().zip(&x2).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let tol_cross = 3.0 * (1.1f64 / n as f64).sqrt();
    assert!(cross.abs() <= tol_cross, "E[x1 x2] = {cross}");
}

#[test]
fn lower_bound_instance_moments() {
    let (d, k, alpha, nu) = (6, 2, 0.1, 2.0);
    let n = 100_000;
    let plain = lower_bound_points(d, k, alpha, nu, &[], n, 4).unwrap();
    for v in plain.iter() {
        assert!((v * v - nu).abs() <= 1e-12);
    }
    let pts = lower_bound_points(d, k, alpha, nu, &[1, 4], n, 4).unwrap();
    let heavy = (nu * nu * k as f64 / alpha).powf(0.25);
    let q = alpha / k as f64;
    let expected = nu * (1.0 - q + q.sqrt());
    // Var(x²) for the two-point magnitude law.
    let var_sq = q * (1.0 - q) * (heavy * heavy - nu).powi(2);
    for a in [1, 4] {
        let m = pts.row(a).iter().map(|v| v * v).sum::<f64>() / n as f64;
        let tol = 4.0 * (var_sq / n as f64).sqrt();
        assert!((m - expected).abs() <= tol, "coordinate {a}: {m} vs {expected}");
    }
    for v in pts.iter() {
        let m = v.abs();
        assert!((m - nu.sqrt()).abs() < 1e-12 || (m - heavy).abs() < 1e-12);
    }
}
