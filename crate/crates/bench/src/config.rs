//! Experiment configuration, read from TOML.
//!
//! ```toml
//! experiment = "subspace"      # optional; must match the subcommand
//! seeds = 50
//! base_seed = 0
//! plot = true
//! timing = false               # record wall times (breaks byte-identical CSVs)
//!
//! [subspace]
//! d = 10
//! k = 1
//! n = 10000
//! alphas = [0.005, 0.01, 0.015, 0.02, 0.025]
//! methods = ["double_filter", "hrpca", "oracle"]
//! delta = 0.1
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Subspace,
    Pipeline,
    Moments,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Subspace => "subspace",
            Experiment::Pipeline => "pipeline",
            Experiment::Moments => "moments",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DoubleFilter,
    Hrpca,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::DoubleFilter => "double_filter",
            Method::Hrpca => "hrpca",
            Method::Oracle => "oracle",
        }
    }

    pub fn id(self) -> u64 {
        match self {
            Method::DoubleFilter => 1,
            Method::Hrpca => 2,
            Method::Oracle => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    None,
    Figure2,
    ClusterKill,
    LargeLeverage,
    Boundary,
}

impl StrategyName {
    pub fn to_strategy(self) -> metamix::Strategy {
        use metamix::Strategy;
        match self {
            StrategyName::None => Strategy::None,
            StrategyName::Figure2 => Strategy::Figure2,
            StrategyName::ClusterKill => Strategy::ClusterKill,
            StrategyName::LargeLeverage => Strategy::large_leverage(),
            StrategyName::Boundary => Strategy::boundary(),
        }
    }
}

fn default_seeds() -> usize {
    10
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_true")]
    pub plot: bool,
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub subspace: SubspaceConfig,
    #[serde(default)]
    pub pipeline: PipelineBenchConfig,
    #[serde(default)]
    pub moments: MomentsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubspaceConfig {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub alphas: Vec<f64>,
    pub methods: Vec<Method>,
    pub delta: f64,
    /// Filter scale; `√2 λ_max(Σ)` when absent.
    pub nu: Option<f64>,
}

impl Default for SubspaceConfig {
    fn default() -> Self {
        Self {
            d: 10,
            k: 1,
            n: 10_000,
            alphas: vec![0.005, 0.01, 0.015, 0.02, 0.025],
            methods: vec![Method::DoubleFilter, Method::Hrpca, Method::Oracle],
            delta: 0.1,
            nu: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdversaryNames {
    pub light1: StrategyName,
    pub heavy: StrategyName,
    pub light2: StrategyName,
}

impl Default for AdversaryNames {
    fn default() -> Self {
        Self {
            light1: StrategyName::None,
            heavy: StrategyName::None,
            light2: StrategyName::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineBenchConfig {
    pub d: usize,
    pub k: usize,
    /// Separation in units of the noise level: `Δ = delta_over_s · s`.
    pub delta_over_s: f64,
    pub s: f64,
    /// Mixing weights; uniform when absent.
    pub p: Option<Vec<f64>>,
    pub n_light1: usize,
    pub t_light1: usize,
    pub n_heavy: usize,
    pub t_heavy: usize,
    pub n_light2: usize,
    pub t_light2: usize,
    /// Corruption levels; each is applied to every split with a strategy.
    pub alphas: Vec<f64>,
    pub adversary: AdversaryNames,
    pub delta: f64,
    /// Training examples per prediction trial; derived from `ρ`, `Δ` when absent.
    pub tau: Option<usize>,
    pub trials: usize,
}

impl Default for PipelineBenchConfig {
    fn default() -> Self {
        Self {
            d: 32,
            k: 3,
            delta_over_s: 4.0,
            s: 1.0,
            p: None,
            n_light1: 20_000,
            t_light1: 1,
            n_heavy: 600,
            t_heavy: 50,
            n_light2: 3000,
            t_light2: 25,
            alphas: vec![0.0],
            adversary: AdversaryNames::default(),
            delta: 0.1,
            tau: None,
            trials: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsConfig {
    pub d: usize,
    pub k: usize,
    pub t: usize,
    pub n: usize,
    pub m_max: usize,
    pub directions: usize,
    pub reps: usize,
    pub sigma: f64,
    /// Batch size for the `E[β̂β̂ᵀ]` identity.
    pub t_identity: usize,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self {
            d: 4,
            k: 1,
            t: 32,
            n: 100_000,
            m_max: 3,
            directions: 4,
            reps: 100_000,
            sigma: 1.0,
            t_identity: 5,
        }
    }
}

fn check(cond: bool, field: &str, reason: &str) -> Result<(), BenchError> {
    if cond {
        Ok(())
    } else {
        Err(BenchError::Config(format!("{field}: {reason}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Check every field relevant to `experiment`.
    pub fn validate(&self, experiment: Experiment) -> Result<(), BenchError> {
        if let Some(e) = self.experiment {
            check(
                e == experiment,
                "experiment",
                &format!("config is for {} but {} was requested", e.name(), experiment.name()),
            )?;
        }
        check(self.seeds >= 1, "seeds", "need at least one seed")?;
        match experiment {
            Experiment::Subspace => {
                let c = &self.subspace;
                check(c.d >= 2, "subspace.d", "need d >= 2")?;
                check(c.k >= 1 && c.k <= c.d, "subspace.k", "need 1 <= k <= d")?;
                check(c.n >= 2, "subspace.n", "need n >= 2")?;
                check(!c.alphas.is_empty(), "subspace.alphas", "empty grid")?;
                check(
                    c.alphas.iter().all(|a| (0.0..1.0).contains(a)),
                    "subspace.alphas",
                    "values must lie in [0, 1)",
                )?;
                check(!c.methods.is_empty(), "subspace.methods", "no methods selected")?;
                check(c.delta > 0.0 && c.delta < 0.5, "subspace.delta", "need 0 < delta < 1/2")?;
                check(c.nu.is_none_or(|v| v > 0.0), "subspace.nu", "need nu > 0")?;
            }
            Experiment::Pipeline => {
                let c = &self.pipeline;
                check(c.k >= 1 && c.k <= c.d, "pipeline.k", "need 1 <= k <= d")?;
                check(c.s > 0.0, "pipeline.s", "need s > 0")?;
                check(c.delta_over_s > 0.0, "pipeline.delta_over_s", "need a positive separation")?;
                if let Some(p) = &c.p {
                    check(p.len() == c.k, "pipeline.p", "need k weights")?;
                    check(
                        (p.iter().sum::<f64>() - 1.0).abs() < 1e-12 && p.iter().all(|v| *v >= 0.0),
                        "pipeline.p",
                        "weights must be non-negative and sum to 1",
                    )?;
                }
                check(!c.alphas.is_empty(), "pipeline.alphas", "empty grid")?;
                check(
                    c.alphas.iter().all(|a| (0.0..0.5).contains(a)),
                    "pipeline.alphas",
                    "values must lie in [0, 1/2)",
                )?;
                check(
                    c.t_light1 >= 1 && c.t_heavy >= 1 && c.t_light2 >= 1,
                    "pipeline.t_*",
                    "batch sizes must be positive",
                )?;
                check(c.delta > 0.0 && c.delta < 0.5, "pipeline.delta", "need 0 < delta < 1/2")?;
                check(c.trials >= 2, "pipeline.trials", "need at least two trials")?;
            }
            Experiment::Moments => {
                let c = &self.moments;
                check(c.d >= 1 && c.k >= 1, "moments.d", "need d, k >= 1")?;
                check(c.m_max >= 1, "moments.m_max", "need m_max >= 1")?;
                check(
                    c.t >= 2 * c.m_max,
                    "moments.t",
                    &format!("need t >= 2 m_max = {}", 2 * c.m_max),
                )?;
                check(c.n >= 2 && c.reps >= 2, "moments.n", "need at least two samples")?;
                check(c.directions >= 1, "moments.directions", "need a direction")?;
                check(c.t_identity >= 1, "moments.t_identity", "need t_identity >= 1")?;
                check(c.sigma >= 0.0, "moments.sigma", "need sigma >= 0")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_document() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg.seeds, 10);
        assert!(cfg.validate(Experiment::Subspace).is_ok());
        assert!(cfg.validate(Experiment::Pipeline).is_ok());
        assert!(cfg.validate(Experiment::Moments).is_ok());
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(ExperimentConfig::from_toml("sedes = 3").is_err());
        assert!(ExperimentConfig::from_toml("[subspace]\nalpha = [0.1]").is_err());
    }

    #[test]
    fn experiment_must_match() {
        let cfg = ExperimentConfig::from_toml("experiment = \"moments\"").unwrap();
        assert!(cfg.validate(Experiment::Subspace).is_err());
    }

    #[test]
    fn invalid_fields_are_named() {
        let cfg = ExperimentConfig::from_toml("[moments]\nt = 3\nm_max = 3").unwrap();
        let msg = cfg.validate(Experiment::Moments).unwrap_err().to_string();
        assert!(msg.contains("moments.t"), "{msg}");
    }
}
