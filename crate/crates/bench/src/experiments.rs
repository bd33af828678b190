//! Experiment sweeps. Each sweep maps a worker pool over `(α, seed)` cells;
//! every cell derives its data stream from `(base_seed, α, seed)` and each
//! method's stream from the data stream plus a method id, so results do not
//! depend on the number of workers or on completion order.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use metamix::classification::FittedMeta;
use metamix::clustering::{greedy_match, moments};
use metamix::model::{
    figure2_points, figure2_second_moment, make_splits, AdversaryConfig, MetaParameter,
    SplitAdversaries, SplitSizes,
};
use metamix::pipeline::{run_pipeline, PipelineConfig};
use metamix::prediction::eval_prediction;
use metamix::robust_pca::{hrpca, robust_subspace_clamped, subspace_metrics, top_k_subspace, SubspaceEstimate};
use metamix::rng;

use crate::config::{Experiment, ExperimentConfig, Method, PipelineBenchConfig, StrategyName};
use crate::records::ResultRecord;
use crate::BenchError;

/// Seed of the data shared by all methods in one `(α, seed)` cell.
pub fn cell_seed(base_seed: u64, alpha: f64, seed: u64) -> u64 {
    rng::combine(&[base_seed, alpha.to_bits(), seed])
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, BenchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Config(format!("threads: {e}")))
}

fn sweep<F>(
    alphas: &[f64],
    seeds: usize,
    threads: usize,
    cell: F,
) -> Result<Vec<ResultRecord>, BenchError>
where
    F: Fn(f64, u64) -> Result<Vec<ResultRecord>, BenchError> + Sync,
{
    let cells: Vec<(f64, u64)> = alphas
        .iter()
        .flat_map(|&a| (0..seeds as u64).map(move |s| (a, s)))
        .collect();
    let per_cell: Vec<Vec<ResultRecord>> = pool(threads)?.install(|| {
        cells
            .par_iter()
            .map(|&(a, s)| cell(a, s))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Default filter scale for Gaussian-like points with second moment `Σ`:
/// `√2 λ_max(Σ)`, the largest standard deviation of `(vᵀx)²`.
pub fn gaussian_nu(sigma: &DMatrix<f64>) -> f64 {
    let top = sigma.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    2f64.sqrt() * top
}

/// Captured variance and removal counts for each method on the spiked
/// robust-PCA benchmark.
pub fn run_subspace_bench(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<ResultRecord>, BenchError> {
    cfg.validate(Experiment::Subspace)?;
    let c = &cfg.subspace;
    let sigma = figure2_second_moment(c.d);
    let nu = c.nu.unwrap_or_else(|| gaussian_nu(&sigma));
    // The population law does not depend on the corruption, so the metrics
    // need only the direction of the leading component.
    let meta = {
        let mut w = DMatrix::zeros(c.d, 1);
        w[(0, 0)] = 0.1f64.sqrt();
        MetaParameter::uniform(w, 1.0)?
    };
    let exp = Experiment::Subspace.name();
    sweep(&c.alphas, cfg.seeds, threads, |alpha, seed| {
        let data_seed = cell_seed(cfg.base_seed, alpha, seed);
        let sample = figure2_points(c.d, alpha, c.n, data_seed)?;
        let n_bad = sample.corrupted.iter().filter(|&&b| b).count();
        let mut out = Vec::new();
        for &method in &c.methods {
            let method_seed = rng::combine(&[data_seed, method.id()]);
            let start = Instant::now();
            let (basis, removed_good, removed_bad) = match method {
                Method::DoubleFilter | Method::Hrpca => {
                    let mut est: SubspaceEstimate = if method == Method::DoubleFilter {
                        robust_subspace_clamped(&sample.observed, c.k, alpha, nu, c.delta, method_seed)?
                    } else {
                        hrpca(&sample.observed, c.k, alpha, method_seed)?
                    };
                    est.attribute(&sample.corrupted)?;
                    let d = &est.diagnostics;
                    (est.basis.clone(), d.removed_good.unwrap_or(0), d.removed_corrupted.unwrap_or(0))
                }
                Method::Oracle => {
                    let keep: Vec<usize> = (0..c.n).filter(|&i| !sample.corrupted[i]).collect();
                    let basis = top_k_subspace(&sample.observed.select_columns(&keep), c.k)?;
                    (basis, 0, n_bad)
                }
            };
            let wall = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
            let m = subspace_metrics(&basis, &meta, Some(&sigma))?;
            let name = method.name();
            out.push(ResultRecord::new(exp, name, alpha, seed, "captured_variance", m.captured_variance, wall));
            out.push(ResultRecord::new(exp, name, alpha, seed, "removed_good", removed_good as f64, wall));
            out.push(ResultRecord::new(exp, name, alpha, seed, "removed_corrupted", removed_bad as f64, wall));
        }
        Ok(out)
    })
}

/// `k` regression vectors with all pairwise distances `Δ`: `(Δ/√2) Q` for a
/// random `d × k` matrix `Q` with orthonormal columns.
pub fn separated_meta(c: &PipelineBenchConfig, seed: u64) -> Result<MetaParameter, BenchError> {
    let mut r = rng::stream(seed, 0);
    let g = DMatrix::from_fn(c.d, c.k, |_, _| r.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let delta = c.delta_over_s * c.s;
    let w = q * (delta / 2f64.sqrt());
    let p = match &c.p {
        Some(p) => DVector::from_vec(p.clone()),
        None => DVector::from_element(c.k, 1.0 / c.k as f64),
    };
    Ok(MetaParameter::new(w, DVector::from_element(c.k, c.s), p)?)
}

/// Training size at which likelihood classification of a new task is
/// reliable: `⌈64 (ρ/Δ)⁴ ln(k/0.01)⌉` (`k = 1` uses `ln(1/0.01)`).
pub fn default_tau(meta: &MetaParameter) -> usize {
    let delta = meta.delta();
    let rho = meta.rho();
    let ratio = if delta.is_finite() { (rho / delta).powi(4) } else { 0.0 };
    ((64.0 * ratio * (meta.k() as f64 / 0.01).ln()).ceil() as usize).max(1)
}

/// Largest distance between a true center and its greedy match.
pub fn matched_center_error(meta: &MetaParameter, centers: &[DVector<f64>]) -> f64 {
    let truth: Vec<DVector<f64>> = meta.w().column_iter().map(|c| c.into_owned()).collect();
    let order = greedy_match(&truth, centers);
    truth
        .iter()
        .zip(order)
        .map(|(w, j)| (w - &centers[j]).norm())
        .fold(0.0, f64::max)
}

/// End-to-end pipeline errors per seed.
pub fn run_pipeline_bench(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<ResultRecord>, BenchError> {
    cfg.validate(Experiment::Pipeline)?;
    let c = &cfg.pipeline;
    let exp = Experiment::Pipeline.name();
    let method = "pipeline";
    sweep(&c.alphas, cfg.seeds, threads, |alpha, seed| {
        let start = Instant::now();
        let meta = separated_meta(c, rng::combine(&[cfg.base_seed, seed, 0x4d45_5441]))?;
        let data_seed = cell_seed(cfg.base_seed, alpha, seed);
        let adv = |name: StrategyName| match name {
            StrategyName::None => AdversaryConfig::none(),
            other => AdversaryConfig::new(other.to_strategy(), alpha),
        };
        let advs = SplitAdversaries {
            light1: adv(c.adversary.light1),
            heavy: adv(c.adversary.heavy),
            light2: adv(c.adversary.light2),
        };
        let sizes = SplitSizes {
            n_light1: c.n_light1,
            t_light1: c.t_light1,
            n_heavy: c.n_heavy,
            t_heavy: c.t_heavy,
            n_light2: c.n_light2,
            t_light2: c.t_light2,
        };
        let splits = make_splits(&meta, &sizes, &advs, data_seed)?;
        // The estimator is told the level of every corrupted split.
        let assumed = |a: &AdversaryConfig| if a.strategy == metamix::Strategy::None { 0.0 } else { a.alpha };
        let mut pcfg = PipelineConfig::new(c.k).with_alphas(
            assumed(&advs.light1),
            assumed(&advs.heavy),
            assumed(&advs.light2),
        );
        pcfg.delta = c.delta;
        pcfg.p_min = meta.p().iter().copied().fold(1.0, f64::min).max(f64::MIN_POSITIVE);
        let mut out = Vec::new();
        let mut push = |metric: &str, value: f64| {
            out.push(ResultRecord::new(exp, method, alpha, seed, metric, value, 0.0));
        };
        let result = run_pipeline(
            &splits.light1,
            &splits.heavy,
            &splits.light2,
            &pcfg,
            rng::combine(&[data_seed, 1]),
        )?;
        for stage in &result.skipped {
            push(&format!("skipped_{stage}"), 1.0);
        }
        if let Some(est) = &result.subspace {
            let m = subspace_metrics(&est.basis, &meta, None)?;
            push("subspace_residual_max", m.residuals.iter().copied().fold(0.0, f64::max));
            push("filter_survivor_fraction", est.diagnostics.survivors.len() as f64 / est.diagnostics.n_points as f64);
        }
        if let Some(model) = &result.clusters {
            let err = matched_center_error(&meta, &model.centers);
            push("center_error_max", err);
            push("centers_recovered", if err <= meta.delta() / 2.0 { 1.0 } else { 0.0 });
        }
        if let Some(mut fitted) = result.fitted.clone() {
            let errs = fitted.evaluate(&meta)?.to_vec();
            push("w_rel_max", errs.iter().map(|e| e.w_rel).fold(0.0, f64::max));
            push("s2_rel_max", errs.iter().map(|e| e.s2_rel).fold(0.0, f64::max));
            push("p_abs_max", errs.iter().map(|e| e.p_abs).fold(0.0, f64::max));
            let tau = c.tau.unwrap_or_else(|| default_tau(&meta));
            let eval = eval_prediction(&meta, &fitted, tau, c.trials, rng::combine(&[data_seed, 2]))?;
            let oracle = eval_prediction(
                &meta,
                &FittedMeta::from_meta(&meta),
                tau,
                c.trials,
                rng::combine(&[data_seed, 2]),
            )?;
            push("mse_map", eval.mse_map);
            push("mse_bayes", eval.mse_bayes);
            push("mse_map_exact_theta", oracle.mse_map);
            push("noise_floor", eval.noise_floor);
        }
        if cfg.timing {
            let wall = start.elapsed().as_secs_f64();
            for r in &mut out {
                r.wall_time_s = wall;
            }
        }
        Ok(out)
    })
}

/// One pass/fail line of the moment diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub seed: u64,
    pub statistic: f64,
    pub passed: bool,
}

/// Largest standardized deviation allowed in the Monte-Carlo identities.
pub const IDENTITY_Z: f64 = 5.0;

/// Moment identities and directional moment bounds, once per seed.
pub fn run_moments_check(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<(Vec<CheckOutcome>, Vec<ResultRecord>), BenchError> {
    cfg.validate(Experiment::Moments)?;
    let c = &cfg.moments;
    let exp = Experiment::Moments.name();
    let d = c.d;
    let mut beta = DVector::zeros(d);
    beta[0] = 1.0;
    let v = if d >= 2 {
        let mut v = DVector::zeros(d);
        v[0] = 0.6;
        v[1] = 0.8;
        v
    } else {
        beta.clone()
    };
    let kk = c.k.min(d);
    let meta = MetaParameter::uniform(DMatrix::identity(d, kk), c.sigma)?;
    let outcomes: Vec<Vec<CheckOutcome>> = pool(threads)?.install(|| {
        (0..cfg.seeds as u64)
            .into_par_iter()
            .map(|seed| -> Result<Vec<CheckOutcome>, BenchError> {
                let s = rng::combine(&[cfg.base_seed, seed]);
                let bound = moments::second_moment_identity(&beta, c.sigma, c.t_identity, c.reps, rng::combine(&[s, 1]))?;
                let chi = moments::chi_square_check(&beta, c.sigma, &v, c.reps, rng::combine(&[s, 2]))?;
                let sos = moments::sos_moment_check(&meta, c.t, c.n, c.m_max, c.directions, rng::combine(&[s, 3]))?;
                Ok(vec![
                    CheckOutcome { name: "second_moment_identity", seed, statistic: bound.max_z, passed: bound.within(IDENTITY_Z) },
                    CheckOutcome { name: "chi_square_moments", seed, statistic: chi.max_z, passed: chi.within(IDENTITY_Z) },
                    CheckOutcome { name: "sos_moment_ratio", seed, statistic: sos.max_ratio, passed: sos.passed },
                ])
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let outcomes: Vec<CheckOutcome> = outcomes.into_iter().flatten().collect();
    let mut records = Vec::new();
    for o in &outcomes {
        let stat = if o.name == "sos_moment_ratio" { "max_ratio" } else { "max_z" };
        records.push(ResultRecord::new(exp, o.name, 0.0, o.seed, stat, o.statistic, 0.0));
        records.push(ResultRecord::new(exp, o.name, 0.0, o.seed, "pass", if o.passed { 1.0 } else { 0.0 }, 0.0));
    }
    Ok((outcomes, records))
}
