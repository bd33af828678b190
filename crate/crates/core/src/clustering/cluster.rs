//! Trimmed Lloyd clustering with median-of-folds boosting.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use super::ClusteringConfig;
use crate::error::{invalid, Error, Result};
use crate::rng;

const MAX_LLOYD_ROUNDS: usize = 100;
/// Points considered when scoring density for the first center.
const DENSITY_POOL: usize = 2000;

/// Centers in the embedding space and per-point labels (`None` = outlier).
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub centers: Vec<DVector<f64>>,
    pub assignments: Vec<Option<usize>>,
}

fn lex_cmp(points: &DMatrix<f64>, a: usize, b: usize) -> Ordering {
    for (x, y) in points.column(a).iter().zip(points.column(b).iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.cmp(&b)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[DVector<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (l, c) in centers.iter().enumerate() {
        let dist = sq_dist(point, c.as_slice());
        if dist < best.1 {
            best = (l, dist);
        }
    }
    best
}

/// Coordinatewise mean after dropping `⌈trim·n⌉` values from each tail;
/// falls back to the coordinatewise median when that would empty the set.
fn coordinatewise_trimmed_mean(points: &DMatrix<f64>, members: &[usize], trim: f64) -> DVector<f64> {
    let n = members.len();
    let cut = (trim * n as f64).ceil() as usize;
    let mut column = vec![0.0; n];
    DVector::from_fn(points.nrows(), |a, _| {
        for (slot, &i) in column.iter_mut().zip(members) {
            *slot = points[(a, i)];
        }
        column.sort_by(f64::total_cmp);
        if 2 * cut < n {
            let kept = &column[cut..n - cut];
            kept.iter().sum::<f64>() / kept.len() as f64
        } else if n % 2 == 1 {
            column[n / 2]
        } else {
            0.5 * (column[n / 2 - 1] + column[n / 2])
        }
    })
}

fn densest_point(points: &DMatrix<f64>, fold: &[usize], k: usize) -> usize {
    let pool = &fold[..fold.len().min(DENSITY_POOL)];
    let q = (pool.len() / (2 * k)).max(1).min(pool.len() - 1);
    let mut best = (pool[0], f64::INFINITY);
    let mut dists = vec![0.0; pool.len()];
    for &i in pool {
        for (slot, &j) in dists.iter_mut().zip(pool) {
            *slot = sq_dist(points.column(i).as_slice(), points.column(j).as_slice());
        }
        dists.sort_by(f64::total_cmp);
        // dists[0] is the point itself.
        let radius = dists[q.min(dists.len() - 1)];
        if radius < best.1 {
            best = (i, radius);
        }
    }
    best.0
}

/// Density-seeded farthest-point initialization that ignores the `trim`
/// fraction of points farthest from the current centers.
fn init_centers(points: &DMatrix<f64>, fold: &[usize], k: usize, trim: f64) -> Vec<DVector<f64>> {
    let first = densest_point(points, fold, k);
    let mut centers = vec![points.column(first).into_owned()];
    let mut dist: Vec<f64> = fold
        .iter()
        .map(|&i| sq_dist(points.column(i).as_slice(), centers[0].as_slice()))
        .collect();
    let skip = (trim * fold.len() as f64).ceil() as usize;
    while centers.len() < k {
        let mut order: Vec<usize> = (0..fold.len()).collect();
        order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
        let pick = order[skip.min(fold.len() - 1)];
        let c = points.column(fold[pick]).into_owned();
        for (slot, &i) in dist.iter_mut().zip(fold) {
            *slot = slot.min(sq_dist(points.column(i).as_slice(), c.as_slice()));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(points: &DMatrix<f64>, fold: &[usize], k: usize, trim: f64) -> Vec<DVector<f64>> {
    let mut centers = init_centers(points, fold, k, trim);
    let mut labels = vec![usize::MAX; fold.len()];
    for _ in 0..MAX_LLOYD_ROUNDS {
        let mut changed = false;
        for (slot, &i) in labels.iter_mut().zip(fold) {
            let (l, _) = nearest(points.column(i).as_slice(), &centers);
            if *slot != l {
                *slot = l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (l, center) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = fold
                .iter()
                .zip(&labels)
                .filter(|(_, &lab)| lab == l)
                .map(|(&i, _)| i)
                .collect();
            if !members.is_empty() {
                *center = coordinatewise_trimmed_mean(points, &members, trim);
            }
        }
    }
    centers
}

/// For each reference vector, the index of its partner in `other` under
/// greedy minimum-distance matching (ties by lower indices).
pub fn greedy_match(reference: &[DVector<f64>], other: &[DVector<f64>]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(reference.len() * other.len());
    for (i, r) in reference.iter().enumerate() {
        for (j, o) in other.iter().enumerate() {
            pairs.push((sq_dist(r.as_slice(), o.as_slice()), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![usize::MAX; reference.len()];
    let mut used = vec![false; other.len()];
    for (_, i, j) in pairs {
        if out[i] == usize::MAX && !used[j] {
            out[i] = j;
            used[j] = true;
        }
    }
    out
}

/// `other` reordered to line up with `reference` by [`greedy_match`].
pub fn match_centers(reference: &[DVector<f64>], other: &[DVector<f64>]) -> Vec<DVector<f64>> {
    greedy_match(reference, other)
        .into_iter()
        .map(|j| other[j].clone())
        .collect()
}

fn coordinatewise_median(vectors: &[&DVector<f64>]) -> DVector<f64> {
    let m = vectors.len();
    let mut column = vec![0.0; m];
    DVector::from_fn(vectors[0].len(), |a, _| {
        for (slot, v) in column.iter_mut().zip(vectors) {
            *slot = v[a];
        }
        column.sort_by(f64::total_cmp);
        if m % 2 == 1 {
            column[m / 2]
        } else {
            0.5 * (column[m / 2 - 1] + column[m / 2])
        }
    })
}

/// Cluster the columns of `points` into `cfg.k` groups.
///
/// Points are put in a canonical order, shuffled with `seed` and dealt into
/// `cfg.boosts` folds. Each fold runs trimmed Lloyd iterations from a
/// density-seeded farthest-point start; fold centers are matched greedily
/// and combined by a coordinatewise median. Finally every point goes to its
/// nearest center and the `cfg.trim` fraction with the largest distances is
/// marked as outliers.
pub fn robust_cluster(points: &DMatrix<f64>, cfg: &ClusteringConfig, seed: u64) -> Result<Clustering> {
    cfg.validate()?;
    let n = points.ncols();
    let k = cfg.k;
    if n < k {
        return Err(invalid("points", format!("need at least k = {k} points, got {n}")));
    }
    if n < k * cfg.boosts {
        return Err(invalid(
            "boosts",
            format!("{} folds of {n} points leave fewer than k per fold", cfg.boosts),
        ));
    }
    if n == 0 {
        return Err(Error::EmptyInput("no points to cluster"));
    }
    if k > 1 && (1..n).all(|i| points.column(i) == points.column(0)) {
        return Err(invalid("points", "all points coincide; cannot form k > 1 clusters"));
    }
    let mut canonical: Vec<usize> = (0..n).collect();
    canonical.sort_by(|&a, &b| lex_cmp(points, a, b));
    let mut rank = vec![0usize; n];
    for (r, &i) in canonical.iter().enumerate() {
        rank[i] = r;
    }
    let mut shuffled = canonical.clone();
    shuffled.shuffle(&mut rng::stream(seed, 0));
    let folds: Vec<Vec<usize>> = (0..cfg.boosts)
        .map(|f| shuffled.iter().skip(f).step_by(cfg.boosts).copied().collect())
        .collect();
    let fold_centers: Vec<Vec<DVector<f64>>> = folds
        .iter()
        .map(|fold| lloyd(points, fold, k, cfg.trim))
        .collect();
    let reference = &fold_centers[0];
    let aligned: Vec<Vec<DVector<f64>>> = fold_centers
        .iter()
        .map(|c| match_centers(reference, c))
        .collect();
    let centers: Vec<DVector<f64>> = (0..k)
        .map(|l| {
            let group: Vec<&DVector<f64>> = aligned.iter().map(|c| &c[l]).collect();
            coordinatewise_median(&group)
        })
        .collect();
    let nearest_all: Vec<(usize, f64)> = (0..n)
        .map(|i| nearest(points.column(i).as_slice(), &centers))
        .collect();
    let mut assignments: Vec<Option<usize>> = nearest_all.iter().map(|&(l, _)| Some(l)).collect();
    let outliers = (cfg.trim * n as f64).ceil() as usize;
    if outliers > 0 {
        let mut by_dist: Vec<usize> = (0..n).collect();
        by_dist.sort_by(|&a, &b| {
            nearest_all[b]
                .1
                .total_cmp(&nearest_all[a].1)
                .then(rank[b].cmp(&rank[a]))
        });
        for &i in by_dist.iter().take(outliers.min(n - k)) {
            assignments[i] = None;
        }
    }
    Ok(Clustering {
        centers,
        assignments,
    })
}
