//! Clustering backends that take the number of clusters as input.

mod kmeans;
mod pam;

use serde::{Deserialize, Serialize};

use crate::dataset::{DataMatrix, DistanceMatrix};
use crate::error::{Error, Result};

pub use kmeans::{kmeans, kmeans_objective, KMeansRun};
pub use pam::{kmedoids_pam, pam_cost, PamRun};

/// Cluster label per observation. Labels are `0..k` and every label is used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("partition needs k >= 1".into()));
        }
        let mut seen = vec![false; k];
        for &l in &labels {
            if l >= k {
                return Err(Error::InvalidData(format!(
                    "label {l} out of range for k = {k}"
                )));
            }
            seen[l] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidData(format!("cluster {empty} is empty")));
        }
        Ok(Self { labels, k })
    }

    /// Build from arbitrary label values, numbering clusters by first
    /// appearance.
    pub fn from_labels<T: PartialEq>(raw: &[T]) -> Result<Self> {
        let mut distinct: Vec<&T> = Vec::new();
        let labels = raw
            .iter()
            .map(|v| match distinct.iter().position(|d| *d == v) {
                Some(p) => p,
                None => {
                    distinct.push(v);
                    distinct.len() - 1
                }
            })
            .collect();
        Self::new(labels, distinct.len())
    }

    /// Same clustering with ids renumbered by first appearance.
    pub fn canonical(&self) -> Self {
        Self::from_labels(&self.labels).expect("relabeling keeps every cluster non-empty")
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Member indices of each cluster, in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iterations: 100,
            seed: 0,
        }
    }
}

impl ClusterConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "restarts and max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn check_k(k: usize, n: usize, min: usize) -> Result<()> {
    if k < min || k > n {
        return Err(Error::KOutOfRange { k, n, min });
    }
    Ok(())
}

/// Within-cluster dispersion `W_k`: for each cluster, the sum of distances
/// over ordered member pairs divided by twice the cluster size, summed over
/// clusters.
pub fn within_dispersion(dist: &DistanceMatrix, partition: &Partition) -> f64 {
    partition
        .members()
        .iter()
        .map(|m| {
            let pair_sum: f64 = m
                .iter()
                .map(|&i| m.iter().map(|&j| dist.get(i, j)).sum::<f64>())
                .sum();
            pair_sum / (2.0 * m.len() as f64)
        })
        .sum()
}

/// Inputs a clusterer may draw on: the raw observations and their distances.
#[derive(Debug, Clone, Copy)]
pub struct ClusterInput<'a> {
    pub data: &'a DataMatrix,
    pub dist: &'a DistanceMatrix,
}

/// Anything that partitions the observations into exactly `k` clusters.
pub trait Clusterer: Sync {
    fn cluster(&self, input: ClusterInput<'_>, k: usize) -> Result<Partition>;
}

impl<F> Clusterer for F
where
    F: Fn(ClusterInput<'_>, usize) -> Result<Partition> + Sync,
{
    fn cluster(&self, input: ClusterInput<'_>, k: usize) -> Result<Partition> {
        self(input, k)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    KMeans,
    KMedoids,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Ok(Algorithm::KMeans),
            "kmedoids" | "k-medoids" | "pam" => Ok(Algorithm::KMedoids),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

/// One of the built-in backends together with its configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Backend {
    pub algorithm: Algorithm,
    pub config: ClusterConfig,
}

impl Backend {
    pub fn kmeans(config: ClusterConfig) -> Self {
        Self {
            algorithm: Algorithm::KMeans,
            config,
        }
    }

    pub fn kmedoids(config: ClusterConfig) -> Self {
        Self {
            algorithm: Algorithm::KMedoids,
            config,
        }
    }
}

impl Clusterer for Backend {
    fn cluster(&self, input: ClusterInput<'_>, k: usize) -> Result<Partition> {
        match self.algorithm {
            Algorithm::KMeans => kmeans(input.data, k, &self.config),
            Algorithm::KMedoids => kmedoids_pam(input.dist, k, &self.config),
        }
    }
}
