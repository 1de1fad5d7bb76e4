//! Lloyd's K-means with k-means++ seeding and seeded restarts.

use rand::Rng;
use rayon::prelude::*;

use super::{check_k, ClusterConfig, Partition};
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Outcome of a single restart.
#[derive(Debug, Clone)]
pub struct KMeansRun {
    pub labels: Vec<usize>,
    pub objective: f64,
    /// Objective after every iteration.
    pub history: Vec<f64>,
}

/// Within-cluster sum of squares of `partition` about its cluster means.
pub fn kmeans_objective(data: &DataMatrix, partition: &Partition) -> f64 {
    let centroids = centroids(data, partition.labels(), partition.k());
    wcss(data, partition.labels(), &centroids)
}

/// Best of `config.restarts` seeded Lloyd runs by within-cluster sum of
/// squares. Ties go to the lowest restart index.
pub fn kmeans(data: &DataMatrix, k: usize, config: &ClusterConfig) -> Result<Partition> {
    config.validate()?;
    check_k(k, data.n(), 1)?;
    let runs: Vec<Option<KMeansRun>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| lloyd_run(data, k, config, r))
        .collect();
    let best = runs
        .into_iter()
        .flatten()
        .reduce(|best, run| {
            if run.objective < best.objective {
                run
            } else {
                best
            }
        })
        .ok_or(Error::EmptyClusters {
            k,
            restarts: config.restarts,
        })?;
    Ok(Partition::new(best.labels, k)?.canonical())
}

/// One restart. `None` when k-means++ cannot find `k` distinct centers.
pub fn lloyd_run(
    data: &DataMatrix,
    k: usize,
    config: &ClusterConfig,
    restart: usize,
) -> Option<KMeansRun> {
    let mut rng = rng_for(config.seed, &[restart as u64]);
    let mut centers = plus_plus(data, k, &mut rng)?;
    let n = data.n();
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    for _ in 0..config.max_iterations {
        let mut changed = false;
        for (i, row) in data.rows().enumerate() {
            let best = nearest(row, &centers);
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        changed |= repair_empty(data, &mut labels, &centers, k);
        centers = centroids(data, &labels, k);
        history.push(wcss(data, &labels, &centers));
        if !changed {
            break;
        }
    }
    Some(KMeansRun {
        objective: *history.last()?,
        labels,
        history,
    })
}

fn plus_plus(data: &DataMatrix, k: usize, rng: &mut impl Rng) -> Option<Vec<Vec<f64>>> {
    let n = data.n();
    let mut centers = vec![data.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = data.rows().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = n - 1;
        for (i, &w) in d2.iter().enumerate() {
            if w > 0.0 && target < w {
                pick = i;
                break;
            }
            target -= w;
        }
        while d2[pick] == 0.0 {
            pick -= 1;
        }
        let c = data.row(pick).to_vec();
        for (slot, row) in d2.iter_mut().zip(data.rows()) {
            *slot = slot.min(sq_dist(row, &c));
        }
        centers.push(c);
    }
    Some(centers)
}

/// Move the point farthest from its own center into each empty cluster.
fn repair_empty(data: &DataMatrix, labels: &mut [usize], centers: &[Vec<f64>], k: usize) -> bool {
    let mut changed = false;
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return changed;
        };
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, row) in data.rows().enumerate() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = sq_dist(row, &centers[labels[i]]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        // k <= n guarantees some cluster holds two or more points.
        let i = far.expect("a cluster with at least two members exists");
        labels[i] = empty;
        changed = true;
    }
}

fn nearest(row: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(row, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn centroids(data: &DataMatrix, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = data.dim();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in data.rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(row) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn wcss(data: &DataMatrix, labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    data.rows()
        .zip(labels)
        .map(|(row, &l)| sq_dist(row, &centers[l]))
        .sum()
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
