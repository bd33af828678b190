//! Generative model for mixtures of linear regressions, task sampling,
//! dataset splits and the adversarial corruption strategies.
//!
//! A task draws a component `z ~ multinomial(p)`, isotropic Gaussian
//! covariates `x ~ N(0, I_d)` and labels `y = w_zᵀ x + s_z ε`.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::rng::{self, StreamRng};

/// Tolerance on `Σ p = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Ground-truth mixture description: regression vectors (columns of `w`),
/// per-component noise standard deviations and mixing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaParameter {
    w: DMatrix<f64>,
    s: DVector<f64>,
    p: DVector<f64>,
}

impl MetaParameter {
    pub fn new(w: DMatrix<f64>, s: DVector<f64>, p: DVector<f64>) -> Result<Self> {
        let k = w.ncols();
        if k == 0 || w.nrows() == 0 {
            return Err(invalid("w", "need d >= 1 and k >= 1"));
        }
        if s.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: s.len(),
            });
        }
        if p.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: p.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("s", "noise levels must be finite and non-negative"));
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("p", "weights must be finite and non-negative"));
        }
        if (p.sum() - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(invalid("p", format!("weights sum to {}, not 1", p.sum())));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(invalid("w", "non-finite entry"));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if (w.column(i) - w.column(j)).norm() == 0.0 {
                    return Err(invalid("w", format!("columns {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { w, s, p })
    }

    /// Uniform weights and a common noise level.
    pub fn uniform(w: DMatrix<f64>, noise: f64) -> Result<Self> {
        let k = w.ncols();
        Self::new(
            w,
            DVector::from_element(k, noise),
            DVector::from_element(k, 1.0 / k as f64),
        )
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn k(&self) -> usize {
        self.w.ncols()
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn s(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn p(&self) -> &DVector<f64> {
        &self.p
    }

    /// `ρ = max_ℓ √(s_ℓ² + ‖w_ℓ‖²)`.
    pub fn rho(&self) -> f64 {
        (0..self.k())
            .map(|l| (self.s[l].powi(2) + self.w.column(l).norm_squared()).sqrt())
            .fold(0.0, f64::max)
    }

    /// Minimum pairwise separation, `+∞` for a single component.
    pub fn delta(&self) -> f64 {
        let k = self.k();
        let mut best = f64::INFINITY;
        for i in 0..k {
            for j in (i + 1)..k {
                best = best.min((self.w.column(i) - self.w.column(j)).norm());
            }
        }
        best
    }

    /// Second moment of the rank-one statistic `y x`:
    /// `(Σ p_ℓ (s_ℓ² + ‖w_ℓ‖²)) I + 2 Σ p_ℓ w_ℓ w_ℓᵀ`.
    pub fn rank_one_second_moment(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut scale = 0.0;
        let mut m = DMatrix::zeros(d, d);
        for l in 0..self.k() {
            let w = self.w.column(l);
            scale += self.p[l] * (self.s[l].powi(2) + w.norm_squared());
            m += 2.0 * self.p[l] * w * w.transpose();
        }
        m + DMatrix::identity(d, d) * scale
    }

    /// `Σ_ℓ s_ℓ² p_ℓ`, the irreducible prediction error.
    pub fn noise_floor(&self) -> f64 {
        (0..self.k()).map(|l| self.p[l] * self.s[l].powi(2)).sum()
    }
}

/// Statistics derived from a meta-parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedStats {
    pub rho: f64,
    pub delta: f64,
    pub p_min: f64,
    pub sigma_min: f64,
}

/// Compute `ρ`, `Δ`, `p_min` and the smallest non-zero eigenvalue of
/// `Σ p_ℓ w_ℓ w_ℓᵀ`. Eigenvalues below `1e-10 · λ_max` count as zero.
pub fn derived_stats(meta: &MetaParameter) -> Result<DerivedStats> {
    if meta.s.iter().any(|&s| s <= 0.0) {
        return Err(invalid("s", "derived statistics need strictly positive noise levels"));
    }
    let d = meta.dim();
    let mut m = DMatrix::zeros(d, d);
    for l in 0..meta.k() {
        let w = meta.w.column(l);
        m += meta.p[l] * w * w.transpose();
    }
    let (eigs, _) = linalg::sym_eigen_desc(&m);
    let largest = eigs.first().copied().unwrap_or(0.0);
    let sigma_min = if largest <= 0.0 {
        0.0
    } else {
        eigs.iter()
            .copied()
            .filter(|&v| v > 1e-10 * largest)
            .fold(f64::INFINITY, f64::min)
    };
    Ok(DerivedStats {
        rho: meta.rho(),
        delta: meta.delta(),
        p_min: meta.p.iter().copied().fold(f64::INFINITY, f64::min),
        sigma_min,
    })
}

/// Observable part of a task: `t × d` covariates and `t` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub covariates: DMatrix<f64>,
    pub labels: DVector<f64>,
}

impl Batch {
    pub fn new(covariates: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        if covariates.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: covariates.nrows(),
                actual: labels.len(),
            });
        }
        if labels.is_empty() {
            return Err(Error::EmptyInput("batch has no examples"));
        }
        Ok(Self { covariates, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.covariates.ncols()
    }

    /// Moment estimate `(1/t) Xᵀ y`.
    pub fn moment_estimate(&self) -> DVector<f64> {
        self.covariates.tr_mul(&self.labels) / self.len() as f64
    }

    /// Mean squared residual `(1/t) Σ (y_j − x_jᵀ w)²`.
    pub fn mean_squared_residual(&self, w: &DVector<f64>) -> f64 {
        let r = &self.labels - &self.covariates * w;
        r.norm_squared() / self.len() as f64
    }
}

impl AsRef<Batch> for Batch {
    fn as_ref(&self) -> &Batch {
        self
    }
}

/// Evaluation-only metadata. Estimators never see it: they are generic over
/// `AsRef<Batch>`, which exposes only the observable data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truth {
    pub component: usize,
    pub corrupted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub batch: Batch,
    pub truth: Option<Truth>,
}

impl Task {
    pub fn is_corrupted(&self) -> bool {
        self.truth.is_some_and(|t| t.corrupted)
    }

    pub fn component(&self) -> Option<usize> {
        self.truth.map(|t| t.component)
    }
}

impl AsRef<Batch> for Task {
    fn as_ref(&self) -> &Batch {
        &self.batch
    }
}

fn gaussian_matrix(rng: &mut StreamRng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Row-major draw order so a task's stream does not depend on layout.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

fn regression_batch(rng: &mut StreamRng, w: &DVector<f64>, s: f64, t: usize) -> Batch {
    let x = gaussian_matrix(rng, t, w.len());
    let mut y = &x * w;
    for v in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *v += s * e;
    }
    Batch {
        covariates: x,
        labels: y,
    }
}

/// Draw `n` tasks with `t` examples each.
pub fn sample_tasks(meta: &MetaParameter, n: usize, t: usize, seed: u64) -> Result<Vec<Task>> {
    if n == 0 {
        return Err(invalid("n", "need at least one task"));
    }
    if t == 0 {
        return Err(invalid("t", "need at least one example per task"));
    }
    let mut rng = rng::stream(seed, 0);
    let picker = WeightedIndex::new(meta.p.iter().copied())
        .map_err(|e| invalid("p", e.to_string()))?;
    let columns: Vec<DVector<f64>> = meta.w.column_iter().map(|c| c.into_owned()).collect();
    let tasks = (0..n)
        .map(|_| {
            let z = picker.sample(&mut rng);
            let batch = regression_batch(&mut rng, &columns[z], meta.s[z], t);
            Task {
                batch,
                truth: Some(Truth {
                    component: z,
                    corrupted: false,
                }),
            }
        })
        .collect();
    Ok(tasks)
}

/// Concrete corruption strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    None,
    /// Zero the first coordinate and replace the second by `±2α^{1/4}`.
    Figure2,
    /// Overwrite tasks of the lightest component with data from the
    /// nearest other component.
    ClusterKill,
    /// Every example gets `y x = scale · ρ² √d · v` for one hidden unit `v`.
    LargeLeverage { scale: f64 },
    /// Rank-one scores placed at `margin ×` the First-Filter upper threshold
    /// of the clean data, with equal energy orthogonal to the clean subspace.
    Boundary { margin: f64 },
}

impl Strategy {
    pub const DEFAULT_LEVERAGE_SCALE: f64 = 10.0;
    pub const DEFAULT_BOUNDARY_MARGIN: f64 = 0.99;

    pub fn large_leverage() -> Self {
        Strategy::LargeLeverage {
            scale: Self::DEFAULT_LEVERAGE_SCALE,
        }
    }

    pub fn boundary() -> Self {
        Strategy::Boundary {
            margin: Self::DEFAULT_BOUNDARY_MARGIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryConfig {
    pub strategy: Strategy,
    pub alpha: f64,
}

impl AdversaryConfig {
    pub fn none() -> Self {
        Self {
            strategy: Strategy::None,
            alpha: 0.0,
        }
    }

    pub fn new(strategy: Strategy, alpha: f64) -> Self {
        Self { strategy, alpha }
    }

    /// Number of tasks replaced out of `n`: `⌊α n⌋`, or zero without a strategy.
    pub fn budget(&self, n: usize) -> usize {
        match self.strategy {
            Strategy::None => 0,
            _ => (self.alpha * n as f64).floor() as usize,
        }
    }
}

/// Replace exactly `⌊α n⌋` tasks according to the configured strategy.
/// The adversary sees everything, including `meta` and the truth labels.
pub fn corrupt(
    tasks: &[Task],
    cfg: &AdversaryConfig,
    meta: &MetaParameter,
    seed: u64,
) -> Result<Vec<Task>> {
    if tasks.is_empty() {
        return Err(Error::EmptyInput("no tasks to corrupt"));
    }
    if !(0.0..1.0).contains(&cfg.alpha) {
        return Err(invalid("alpha", format!("need 0 <= alpha < 1, got {}", cfg.alpha)));
    }
    let n = tasks.len();
    let budget = cfg.budget(n);
    if budget >= n && budget > 0 {
        return Err(invalid("alpha", "corruption budget covers every task"));
    }
    let mut out = tasks.to_vec();
    if budget == 0 {
        return Ok(out);
    }
    let mut rng = rng::stream(seed, 1);
    let victims = match cfg.strategy {
        Strategy::ClusterKill => cluster_kill_victims(tasks, meta, budget, &mut rng)?,
        _ => {
            let mut v = rand::seq::index::sample(&mut rng, n, budget).into_vec();
            v.sort_unstable();
            v
        }
    };
    let d = tasks[0].batch.dim();
    match cfg.strategy {
        Strategy::None => {}
        Strategy::Figure2 => {
            if d < 2 {
                return Err(invalid("d", "spike corruption needs d >= 2"));
            }
            let amp = 2.0 * cfg.alpha.powf(0.25);
            for &i in &victims {
                let x = &mut out[i].batch.covariates;
                for r in 0..x.nrows() {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    x[(r, 0)] = 0.0;
                    x[(r, 1)] = sign * amp;
                }
            }
        }
        Strategy::ClusterKill => {
            let victim_component = lightest_component(meta);
            let donor = nearest_other_component(meta, victim_component)?;
            let w = meta.w.column(donor).into_owned();
            for &i in &victims {
                let t = out[i].batch.len();
                out[i].batch = regression_batch(&mut rng, &w, meta.s[donor], t);
            }
        }
        Strategy::LargeLeverage { scale } => {
            let v = random_unit(&mut rng, d);
            let target = scale * meta.rho().powi(2) * (d as f64).sqrt();
            for &i in &victims {
                out[i].batch = constant_statistic_batch(&(&v * target), out[i].batch.len());
            }
        }
        Strategy::Boundary { margin } => {
            let point = boundary_point(tasks, meta.k(), cfg.alpha, margin, &mut rng)?;
            for &i in &victims {
                out[i].batch = constant_statistic_batch(&point, out[i].batch.len());
            }
        }
    }
    for &i in &victims {
        let component = out[i].truth.map(|t| t.component).unwrap_or(usize::MAX);
        out[i].truth = Some(Truth {
            component,
            corrupted: true,
        });
    }
    Ok(out)
}

fn lightest_component(meta: &MetaParameter) -> usize {
    let mut best = 0;
    for l in 1..meta.k() {
        if meta.p[l] < meta.p[best] {
            best = l;
        }
    }
    best
}

fn nearest_other_component(meta: &MetaParameter, of: usize) -> Result<usize> {
    (0..meta.k())
        .filter(|&l| l != of)
        .map(|l| (l, (meta.w.column(l) - meta.w.column(of)).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(l, _)| l)
        .ok_or_else(|| invalid("k", "cluster_kill needs at least two components"))
}

fn cluster_kill_victims(
    tasks: &[Task],
    meta: &MetaParameter,
    budget: usize,
    rng: &mut StreamRng,
) -> Result<Vec<usize>> {
    let victim = lightest_component(meta);
    let donor = nearest_other_component(meta, victim)?;
    let (mut primary, rest): (Vec<usize>, Vec<usize>) =
        (0..tasks.len()).partition(|&i| tasks[i].component() == Some(victim));
    let mut chosen = Vec::with_capacity(budget);
    if primary.len() > budget {
        primary = rand::seq::index::sample(rng, primary.len(), budget)
            .into_iter()
            .map(|j| primary[j])
            .collect();
    }
    chosen.extend(primary);
    if chosen.len() < budget {
        let fill: Vec<usize> = rest
            .into_iter()
            .filter(|&i| tasks[i].component() != Some(donor))
            .collect();
        let need = (budget - chosen.len()).min(fill.len());
        chosen.extend(
            rand::seq::index::sample(rng, fill.len(), need)
                .into_iter()
                .map(|j| fill[j]),
        );
    }
    if chosen.len() < budget {
        let taken: std::collections::HashSet<usize> = chosen.iter().copied().collect();
        let fill: Vec<usize> = (0..tasks.len()).filter(|i| !taken.contains(i)).collect();
        let need = budget - chosen.len();
        chosen.extend(
            rand::seq::index::sample(rng, fill.len(), need)
                .into_iter()
                .map(|j| fill[j]),
        );
    }
    chosen.sort_unstable();
    Ok(chosen)
}

fn random_unit(rng: &mut StreamRng, d: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// A batch whose every example has rank-one statistic `y x = point`.
fn constant_statistic_batch(point: &DVector<f64>, t: usize) -> Batch {
    let norm = point.norm();
    let (x, y) = if norm > 0.0 {
        (point / norm.sqrt(), norm.sqrt())
    } else {
        (DVector::zeros(point.len()), 0.0)
    };
    let mut cov = DMatrix::zeros(t, point.len());
    for r in 0..t {
        cov.row_mut(r).copy_from(&x.transpose());
    }
    Batch {
        covariates: cov,
        labels: DVector::from_element(t, y),
    }
}

fn boundary_point(
    tasks: &[Task],
    k: usize,
    alpha: f64,
    margin: f64,
    rng: &mut StreamRng,
) -> Result<DVector<f64>> {
    let stats = rank_one_statistics(tasks);
    let d = stats.nrows();
    let k = k.min(d);
    let u = linalg::top_k_eigenbasis(&linalg::second_moment_sum(&stats, None), k)?;
    let proj = u.tr_mul(&stats);
    let mut scores: Vec<f64> = proj.column_iter().map(|c| c.norm_squared()).collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    let cut = ((2.0 * alpha * scores.len() as f64).ceil() as usize).clamp(1, scores.len());
    let threshold = scores[cut - 1];
    let inside = u.column(0).into_owned();
    let mut outside = random_unit(rng, d);
    if d > k {
        outside -= &u * u.tr_mul(&outside);
        let n = outside.norm();
        if n > 1e-12 {
            outside /= n;
        }
    }
    let amp = (margin * threshold).max(0.0).sqrt();
    Ok(inside * amp + outside * amp)
}

/// Rank-one statistics `y_{ij} x_{ij}` of every example, as columns.
pub fn rank_one_statistics<B: AsRef<Batch>>(tasks: &[B]) -> DMatrix<f64> {
    let total: usize = tasks.iter().map(|t| t.as_ref().len()).sum();
    let d = tasks.first().map(|t| t.as_ref().dim()).unwrap_or(0);
    let mut out = DMatrix::zeros(d, total);
    let mut col = 0;
    for task in tasks {
        let b = task.as_ref();
        for j in 0..b.len() {
            let y = b.labels[j];
            for a in 0..d {
                out[(a, col)] = y * b.covariates[(j, a)];
            }
            col += 1;
        }
    }
    out
}

/// Task counts and batch sizes of the three splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub n_light1: usize,
    pub t_light1: usize,
    pub n_heavy: usize,
    pub t_heavy: usize,
    pub n_light2: usize,
    pub t_light2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitAdversaries {
    pub light1: AdversaryConfig,
    pub heavy: AdversaryConfig,
    pub light2: AdversaryConfig,
}

impl SplitAdversaries {
    pub fn none() -> Self {
        Self {
            light1: AdversaryConfig::none(),
            heavy: AdversaryConfig::none(),
            light2: AdversaryConfig::none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplits {
    pub light1: Vec<Task>,
    pub heavy: Vec<Task>,
    pub light2: Vec<Task>,
    /// Fractions of tasks actually replaced in (light1, heavy, light2).
    pub alphas: (f64, f64, f64),
}

const SPLIT_LIGHT1: u64 = 1;
const SPLIT_HEAVY: u64 = 2;
const SPLIT_LIGHT2: u64 = 3;

fn make_split(
    meta: &MetaParameter,
    n: usize,
    t: usize,
    adv: &AdversaryConfig,
    seed: u64,
    split: u64,
) -> Result<(Vec<Task>, f64)> {
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let sample_seed = rng::combine(&[seed, split, 0]);
    let corrupt_seed = rng::combine(&[seed, split, 1]);
    let clean = sample_tasks(meta, n, t, sample_seed)?;
    let tasks = corrupt(&clean, adv, meta, corrupt_seed)?;
    let applied = adv.budget(n) as f64 / n as f64;
    Ok((tasks, applied))
}

/// Sample and corrupt the three splits from independent streams of `seed`.
pub fn make_splits(
    meta: &MetaParameter,
    sizes: &SplitSizes,
    adv: &SplitAdversaries,
    seed: u64,
) -> Result<DatasetSplits> {
    let (light1, a1) = make_split(
        meta,
        sizes.n_light1,
        sizes.t_light1,
        &adv.light1,
        seed,
        SPLIT_LIGHT1,
    )?;
    let (heavy, a2) = make_split(meta, sizes.n_heavy, sizes.t_heavy, &adv.heavy, seed, SPLIT_HEAVY)?;
    let (light2, a3) = make_split(
        meta,
        sizes.n_light2,
        sizes.t_light2,
        &adv.light2,
        seed,
        SPLIT_LIGHT2,
    )?;
    for (name, a) in [("light1", a1), ("heavy", a2), ("light2", a3)] {
        if a >= 0.5 {
            log::warn!("split {name} has corruption fraction {a} >= 1/2");
        }
    }
    Ok(DatasetSplits {
        light1,
        heavy,
        light2,
        alphas: (a1, a2, a3),
    })
}

/// Points from the spiked robust-PCA benchmark distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure2Sample {
    /// Original draws before corruption (`d × n`).
    pub clean: DMatrix<f64>,
    /// Observed points after corruption (`d × n`).
    pub observed: DMatrix<f64>,
    pub corrupted: Vec<bool>,
}

/// Population second moment of the clean spiked law: `I_d + 0.1 e₁e₁ᵀ`.
pub fn figure2_second_moment(d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    m[(0, 0)] = 1.1;
    m
}

/// Sample `n` points with `x₁ ~ N(0, 1.1)`, `x₂ = z x₁/√1.1` for a Rademacher
/// `z`, remaining coordinates standard normal. Each point is corrupted
/// independently with probability `alpha` into `[0, ±2α^{1/4}, x_{3:d}]`.
pub fn figure2_points(d: usize, alpha: f64, n: usize, seed: u64) -> Result<Figure2Sample> {
    if d < 2 {
        return Err(invalid("d", "need d >= 2"));
    }
    if n == 0 {
        return Err(invalid("n", "need n >= 1"));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid("alpha", "need 0 <= alpha < 1"));
    }
    let mut rng = rng::stream(seed, 2);
    let sd1 = 1.1f64.sqrt();
    let amp = 2.0 * alpha.powf(0.25);
    let mut clean = DMatrix::zeros(d, n);
    let mut observed = DMatrix::zeros(d, n);
    let mut corrupted = vec![false; n];
    for i in 0..n {
        let x1 = sd1 * rng.sample::<f64, _>(StandardNormal);
        let z = if rng.random::<bool>() { 1.0 } else { -1.0 };
        clean[(0, i)] = x1;
        clean[(1, i)] = z * x1 / sd1;
        for a in 2..d {
            clean[(a, i)] = rng.sample(StandardNormal);
        }
        let flip = rng.random::<f64>() < alpha;
        let z2 = if rng.random::<bool>() { 1.0 } else { -1.0 };
        observed.set_column(i, &clean.column(i));
        if flip {
            corrupted[i] = true;
            observed[(0, i)] = 0.0;
            observed[(1, i)] = z2 * amp;
        }
    }
    Ok(Figure2Sample {
        clean,
        observed,
        corrupted,
    })
}

/// Hard instance for subspace estimation: coordinates in `index_set` take
/// `±√ν` with probability `(1 − α/k)/2` each and `±(ν²k/α)^{1/4}` with
/// probability `α/(2k)` each; other coordinates take `±√ν` evenly.
pub fn lower_bound_points(
    d: usize,
    k: usize,
    alpha: f64,
    nu: f64,
    index_set: &[usize],
    n: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(invalid("nu", "need nu > 0"));
    }
    if !index_set.is_empty() {
        if index_set.len() != k {
            return Err(invalid("index_set", format!("need |I| = k = {k}")));
        }
        if alpha <= 0.0 {
            return Err(invalid("alpha", "alpha = 0 makes the heavy atoms degenerate"));
        }
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid("alpha", "need 0 <= alpha < 1"));
    }
    let mut in_set = vec![false; d];
    for &i in index_set {
        if i >= d {
            return Err(invalid("index_set", format!("index {i} out of range for d = {d}")));
        }
        if in_set[i] {
            return Err(invalid("index_set", format!("duplicate index {i}")));
        }
        in_set[i] = true;
    }
    let mut rng = rng::stream(seed, 3);
    let base = nu.sqrt();
    let heavy = if index_set.is_empty() {
        0.0
    } else {
        (nu * nu * k as f64 / alpha).powf(0.25)
    };
    let heavy_prob = if k == 0 { 0.0 } else { alpha / k as f64 };
    let mut out = DMatrix::zeros(d, n);
    for i in 0..n {
        for a in 0..d {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let magnitude = if in_set[a] && rng.random::<f64>() < heavy_prob {
                heavy
            } else {
                base
            };
            out[(a, i)] = sign * magnitude;
        }
    }
    Ok(out)
}
