//! Partitioning around medoids: greedy BUILD followed by best-improvement
//! SWAP.

use super::{check_k, ClusterConfig, Partition};
use crate::dataset::DistanceMatrix;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct PamRun {
    pub medoids: Vec<usize>,
    pub labels: Vec<usize>,
    pub cost: f64,
    /// Cost after BUILD and after every accepted swap.
    pub history: Vec<f64>,
}

/// Total distance from every observation to its nearest medoid.
pub fn pam_cost(dist: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..dist.n())
        .map(|i| {
            medoids
                .iter()
                .map(|&m| dist.get(i, m))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// K-medoids by PAM. Deterministic; `config.max_iterations` caps the number
/// of swaps.
pub fn kmedoids_pam(dist: &DistanceMatrix, k: usize, config: &ClusterConfig) -> Result<Partition> {
    let run = pam(dist, k, config)?;
    Partition::new(run.labels, k)
}

pub fn pam(dist: &DistanceMatrix, k: usize, config: &ClusterConfig) -> Result<PamRun> {
    config.validate()?;
    let n = dist.n();
    check_k(k, n, 1)?;

    let mut medoids = build(dist, k);
    let mut nearest: Vec<f64> = (0..n).map(|i| nearest_two(dist, i, &medoids).0).collect();
    let mut cost: f64 = nearest.iter().sum();
    let mut history = vec![cost];

    for _ in 0..config.max_iterations {
        let (second, is_medoid) = {
            let mut flag = vec![false; n];
            medoids.iter().for_each(|&m| flag[m] = true);
            let second: Vec<(usize, f64)> = (0..n)
                .map(|i| {
                    let (_, slot, d2) = nearest_two(dist, i, &medoids);
                    (slot, d2)
                })
                .collect();
            (second, flag)
        };
        let mut best: Option<(usize, usize, f64)> = None;
        for (slot, _) in medoids.iter().enumerate() {
            for h in (0..n).filter(|&h| !is_medoid[h]) {
                // Change in cost when medoid `slot` is replaced by `h`.
                let mut delta = 0.0;
                for j in 0..n {
                    let dj = nearest[j];
                    let djh = dist.get(j, h);
                    let (near_slot, second_d) = second[j];
                    delta += if near_slot == slot {
                        djh.min(second_d) - dj
                    } else {
                        djh.min(dj) - dj
                    };
                }
                if delta < best.map_or(-1e-12 * cost.max(1.0), |b| b.2) {
                    best = Some((slot, h, delta));
                }
            }
        }
        let Some((slot, h, _)) = best else { break };
        medoids[slot] = h;
        nearest = (0..n).map(|i| nearest_two(dist, i, &medoids).0).collect();
        let new_cost: f64 = nearest.iter().sum();
        if new_cost >= cost {
            break;
        }
        cost = new_cost;
        history.push(cost);
    }

    let labels = assign(dist, &medoids);
    Ok(PamRun {
        medoids,
        labels,
        cost,
        history,
    })
}

fn build(dist: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = dist.n();
    let first = (0..n)
        .map(|i| (i, dist.row(i).iter().sum::<f64>()))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
        .0;
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = dist.row(first).to_vec();
    while medoids.len() < k {
        let mut best = None;
        let mut best_gain = f64::NEG_INFINITY;
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - dist.get(j, c)).max(0.0)).sum();
            if gain > best_gain {
                best_gain = gain;
                best = Some(c);
            }
        }
        let c = best.expect("k <= n leaves a candidate");
        for (j, slot) in nearest.iter_mut().enumerate() {
            *slot = slot.min(dist.get(j, c));
        }
        medoids.push(c);
    }
    medoids
}

/// (nearest distance, nearest medoid slot, second-nearest distance).
fn nearest_two(dist: &DistanceMatrix, i: usize, medoids: &[usize]) -> (f64, usize, f64) {
    let mut d1 = f64::INFINITY;
    let mut s1 = 0;
    let mut d2 = f64::INFINITY;
    for (slot, &m) in medoids.iter().enumerate() {
        let d = dist.get(i, m);
        if d < d1 {
            d2 = d1;
            d1 = d;
            s1 = slot;
        } else if d < d2 {
            d2 = d;
        }
    }
    (d1, s1, d2)
}

/// Nearest medoid with ties to the lowest slot; a medoid always joins its
/// own cluster.
fn assign(dist: &DistanceMatrix, medoids: &[usize]) -> Vec<usize> {
    (0..dist.n())
        .map(|i| match medoids.iter().position(|&m| m == i) {
            Some(slot) => slot,
            None => nearest_two(dist, i, medoids).1,
        })
        .collect()
}
