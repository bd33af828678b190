//! End-to-end estimation from three task splits.
//!
//! 1. Robust subspace from the rank-one statistics of `light1`.
//! 2. Clustering of `heavy` in that subspace, lifted centers and radii.
//! 3. Classification and refinement with `light2`.
//!
//! A stage whose split is empty is skipped and listed in
//! [`PipelineOutput::skipped`]. Without `light1` clustering runs in the full
//! space; without `heavy` nothing downstream can run; without `light2` the
//! coarse model is reported as the fit.

use nalgebra::DMatrix;

use crate::classification::{refine, FittedMeta};
use crate::clustering::{
    embed_heavy, estimate_r2, lift, robust_cluster, ClusterModel, ClusteringConfig,
};
use crate::error::{invalid, Result};
use crate::model::{rank_one_statistics, Batch};
use crate::robust_pca::{default_nu, robust_subspace_clamped, SubspaceEstimate};
use crate::rng;
use crate::stats::clamped_trimmed_mean;

/// Estimator settings. Corruption levels are the estimator's assumptions,
/// not the adversary's actual budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub k: usize,
    pub delta: f64,
    pub alpha_light1: f64,
    pub alpha_heavy: f64,
    pub alpha_light2: f64,
    /// Fourth-moment scale for the filter; estimated from `light1` when `None`.
    pub nu: Option<f64>,
    /// Assumed smallest mixing weight, used for the default clustering trim.
    pub p_min: f64,
    /// Clustering trim; `α_H / p_min` capped below 1/4 when `None`.
    pub trim: Option<f64>,
    /// Clustering folds; `⌈4 ln(1/δ)⌉` when `None`.
    pub boosts: Option<usize>,
}

impl PipelineConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            delta: 0.1,
            alpha_light1: 0.0,
            alpha_heavy: 0.0,
            alpha_light2: 0.0,
            nu: None,
            p_min: 1.0 / k.max(1) as f64,
            trim: None,
            boosts: None,
        }
    }

    pub fn with_alphas(mut self, light1: f64, heavy: f64, light2: f64) -> Self {
        self.alpha_light1 = light1;
        self.alpha_heavy = heavy;
        self.alpha_light2 = light2;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub subspace: Option<SubspaceEstimate>,
    /// The `ν` handed to the filter.
    pub nu: Option<f64>,
    pub clusters: Option<ClusterModel>,
    pub fitted: Option<FittedMeta>,
    pub skipped: Vec<&'static str>,
}

/// Scale estimate `ρ̂² ≈ E[y²]` from a trimmed mean of squared labels.
pub fn label_energy<B: AsRef<Batch>>(tasks: &[B], alpha: f64) -> Result<f64> {
    let squares: Vec<f64> = tasks
        .iter()
        .flat_map(|t| t.as_ref().labels.iter().map(|y| y * y).collect::<Vec<_>>())
        .collect();
    clamped_trimmed_mean(&squares, alpha)
}

/// Run all stages. Streams for the filter and the clustering are derived
/// from `seed`.
pub fn run_pipeline<B: AsRef<Batch>>(
    light1: &[B],
    heavy: &[B],
    light2: &[B],
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<PipelineOutput> {
    if cfg.k == 0 {
        return Err(invalid("k", "need k >= 1"));
    }
    if !(cfg.p_min > 0.0 && cfg.p_min <= 1.0) {
        return Err(invalid("p_min", "need 0 < p_min <= 1"));
    }
    let mut out = PipelineOutput {
        subspace: None,
        nu: None,
        clusters: None,
        fitted: None,
        skipped: Vec::new(),
    };
    let d = light1
        .iter()
        .chain(heavy)
        .chain(light2)
        .map(|t| t.as_ref().dim())
        .next()
        .ok_or(crate::Error::EmptyInput("all splits are empty"))?;

    let basis = if light1.is_empty() {
        out.skipped.push("subspace");
        DMatrix::identity(d, d)
    } else {
        let points = rank_one_statistics(light1);
        let nu = match cfg.nu {
            Some(v) => v,
            None => default_nu(cfg.k, label_energy(light1, cfg.alpha_light1)?.sqrt()),
        };
        let est = robust_subspace_clamped(
            &points,
            cfg.k,
            cfg.alpha_light1,
            nu,
            cfg.delta,
            rng::combine(&[seed, 1]),
        )?;
        let basis = est.basis.clone();
        out.nu = Some(nu);
        out.subspace = Some(est);
        basis
    };

    if heavy.is_empty() {
        out.skipped.extend(["clustering", "refinement"]);
        return Ok(out);
    }
    let embedded = embed_heavy(heavy, &basis)?;
    let trim = cfg
        .trim
        .unwrap_or_else(|| ClusteringConfig::default_trim(cfg.alpha_heavy, cfg.p_min));
    let boosts = cfg
        .boosts
        .unwrap_or_else(|| ClusteringConfig::default_boosts(cfg.delta))
        .min(heavy.len() / cfg.k)
        .max(1);
    let ccfg = ClusteringConfig::new(cfg.k, trim, boosts);
    let clustering = robust_cluster(&embedded, &ccfg, rng::combine(&[seed, 2]))?;
    let centers = lift(&basis, &clustering.centers)?;
    let radii = estimate_r2(heavy, &centers, &clustering.assignments, cfg.alpha_heavy)?;
    let model = ClusterModel::new(centers, radii, clustering.assignments)?;

    if light2.is_empty() {
        out.skipped.push("refinement");
        let n = model.assignments.len() as f64;
        let mut coarse = FittedMeta {
            w_hat: model.centers.clone(),
            s2_hat: model.radii.clone(),
            p_hat: vec![0.0; model.k()],
            fallback: vec![true; model.k()],
            errors: None,
        };
        for l in model.assignments.iter().flatten() {
            coarse.p_hat[*l] += 1.0 / n;
        }
        out.fitted = Some(coarse);
    } else {
        out.fitted = Some(refine(light2, &model, cfg.alpha_light2)?);
    }
    out.clusters = Some(model);
    Ok(out)
}
