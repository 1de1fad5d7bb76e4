//! The integrated p-value (IP) index and the step-wise estimate of the
//! number of clusters.
//!
//! For a partition into `k` clusters every observation `i` yields one
//! homogeneity test: its distances to the other members of its own cluster
//! against its distances to the members of its nearest other cluster. The
//! IP is the arithmetic mean of those p-values. Starting at `k = 2`, the
//! first `k` whose IP reaches `alpha` ends the search with `k - 1` clusters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterInput, Clusterer, Partition};
use crate::dataset::DistanceMatrix;
use crate::error::{Error, Result};
use crate::homogeneity::{homogeneity_test, TestMode, MIN_W};
use crate::seed::derive_seed;

/// How the distances from an observation to a cluster are summarized when
/// picking its nearest cluster.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NearestRule {
    #[default]
    Mean,
    Median,
}

impl std::str::FromStr for NearestRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(NearestRule::Mean),
            "median" => Ok(NearestRule::Median),
            other => Err(Error::InvalidParameter(format!(
                "unknown nearest rule {other:?}"
            ))),
        }
    }
}

impl NearestRule {
    fn summarize(self, values: &mut [f64]) -> f64 {
        match self {
            NearestRule::Mean => values.iter().sum::<f64>() / values.len() as f64,
            NearestRule::Median => {
                values.sort_by(f64::total_cmp);
                let m = values.len() / 2;
                if values.len() % 2 == 1 {
                    values[m]
                } else {
                    0.5 * (values[m - 1] + values[m])
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpConfig {
    pub w: usize,
    pub alpha: f64,
    pub nearest_rule: NearestRule,
    /// Monte Carlo replicates per test when a Monte Carlo p-value is used.
    pub b: usize,
    pub max_k: usize,
    pub mode: TestMode,
}

impl Default for IpConfig {
    fn default() -> Self {
        Self {
            w: 3,
            alpha: 0.01,
            nearest_rule: NearestRule::Mean,
            b: 10_000,
            max_k: 10,
            mode: TestMode::Auto,
        }
    }
}

impl IpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.w < MIN_W {
            return Err(Error::InvalidParameter(format!(
                "w must be at least {MIN_W}, got {}",
                self.w
            )));
        }
        if self.max_k < 2 {
            return Err(Error::InvalidParameter("max_k must be at least 2".into()));
        }
        if self.b == 0 {
            return Err(Error::InvalidParameter("b must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one step of the search, at `k_tried` clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpStepResult {
    pub k_tried: usize,
    /// `None` for observations in singleton clusters.
    pub per_observation_p: Vec<Option<f64>>,
    pub ip: f64,
    pub skipped: usize,
    /// Observations whose distances all fell into one category; their test
    /// cannot reject and contributes p = 1.
    pub single_category: usize,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    pub k_hat: usize,
    /// Steps for `k = 2, 3, ...` in order.
    pub trajectory: Vec<IpStepResult>,
    /// True when the search hit `max_k` without the IP reaching `alpha`.
    pub cap_reached: bool,
}

/// Nearest non-mother cluster of observation `i`. Ties go to the lowest
/// cluster id.
pub fn nearest_cluster(
    i: usize,
    partition: &Partition,
    dist: &DistanceMatrix,
    rule: NearestRule,
) -> Result<usize> {
    if partition.k() < 2 {
        return Err(Error::InvalidParameter(
            "nearest cluster needs k >= 2".into(),
        ));
    }
    Ok(nearest_among(
        i,
        partition.label(i),
        &partition.members(),
        dist,
        rule,
    ))
}

fn nearest_among(
    i: usize,
    mother: usize,
    members: &[Vec<usize>],
    dist: &DistanceMatrix,
    rule: NearestRule,
) -> usize {
    if members.len() == 2 {
        return 1 - mother;
    }
    let row = dist.row(i);
    let mut best = usize::MAX;
    let mut best_value = f64::INFINITY;
    let mut buf = Vec::new();
    for (c, m) in members.iter().enumerate() {
        if c == mother {
            continue;
        }
        buf.clear();
        buf.extend(m.iter().map(|&j| row[j]));
        let v = rule.summarize(&mut buf);
        if best == usize::MAX || v < best_value {
            best = c;
            best_value = v;
        }
    }
    best
}

/// Homogeneity-test p-value of observation `i`, or `None` when its cluster is
/// a singleton.
///
/// When every distance from `i` falls into a single category the table has
/// one column, observed equals expected, and the p-value is 1.
pub fn observation_pvalue(
    i: usize,
    partition: &Partition,
    dist: &DistanceMatrix,
    config: &IpConfig,
    seed: u64,
) -> Result<Option<f64>> {
    if partition.k() < 2 {
        return Err(Error::InvalidParameter(
            "observation p-value needs k >= 2".into(),
        ));
    }
    observation_test(
        i,
        partition.label(i),
        &partition.members(),
        dist,
        config,
        seed,
    )
    .map(Outcome::p_value)
}

enum Outcome {
    Skipped,
    Tested(f64),
    SingleCategory,
}

impl Outcome {
    fn p_value(self) -> Option<f64> {
        match self {
            Outcome::Skipped => None,
            Outcome::Tested(p) => Some(p),
            Outcome::SingleCategory => Some(1.0),
        }
    }
}

fn observation_test(
    i: usize,
    mother: usize,
    members: &[Vec<usize>],
    dist: &DistanceMatrix,
    config: &IpConfig,
    seed: u64,
) -> Result<Outcome> {
    if members[mother].len() < 2 {
        return Ok(Outcome::Skipped);
    }
    let nearest = nearest_among(i, mother, members, dist, config.nearest_rule);
    let row = dist.row(i);
    let own: Vec<f64> = members[mother]
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| row[j])
        .collect();
    let other: Vec<f64> = members[nearest].iter().map(|&j| row[j]).collect();
    match homogeneity_test(&own, &other, config.w, config.mode, config.b, seed) {
        Ok(result) => Ok(Outcome::Tested(result.p_value)),
        Err(Error::DegenerateTable) => Ok(Outcome::SingleCategory),
        Err(e) => Err(e),
    }
}

/// Arithmetic mean of the per-observation p-values.
pub fn integrated_pvalue(p_list: &[f64]) -> Result<f64> {
    if p_list.is_empty() {
        return Err(Error::NoTestableObservations);
    }
    Ok(p_list.iter().sum::<f64>() / p_list.len() as f64)
}

/// IP of a given partition. The Monte Carlo seed of observation `i` is
/// derived from `(seed, k, i)`.
pub fn ip_for_partition(
    dist: &DistanceMatrix,
    partition: &Partition,
    config: &IpConfig,
    seed: u64,
) -> Result<IpStepResult> {
    config.validate()?;
    let k = partition.k();
    if k < 2 {
        return Err(Error::KOutOfRange {
            k,
            n: dist.n(),
            min: 2,
        });
    }
    if partition.len() != dist.n() {
        return Err(Error::LengthMismatch {
            left: partition.len(),
            right: dist.n(),
        });
    }
    let members = partition.members();
    let outcomes = (0..dist.n())
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, &[k as u64, i as u64]);
            observation_test(i, partition.label(i), &members, dist, config, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let single_category = outcomes
        .iter()
        .filter(|o| matches!(o, Outcome::SingleCategory))
        .count();
    let per_observation_p: Vec<Option<f64>> = outcomes.into_iter().map(Outcome::p_value).collect();
    let tested: Vec<f64> = per_observation_p.iter().flatten().copied().collect();
    let ip = integrated_pvalue(&tested)?;
    Ok(IpStepResult {
        k_tried: k,
        single_category,
        skipped: per_observation_p.len() - tested.len(),
        per_observation_p,
        ip,
        partition: partition.clone(),
    })
}

/// Cluster at `k` with `clusterer`, then score the partition.
pub fn ip_for_k(
    input: ClusterInput<'_>,
    clusterer: &dyn Clusterer,
    k: usize,
    config: &IpConfig,
    seed: u64,
) -> Result<IpStepResult> {
    let n = input.dist.n();
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n, min: 2 });
    }
    let partition = clusterer.cluster(input, k)?;
    if partition.k() != k || partition.len() != n {
        return Err(Error::InvalidData(format!(
            "clusterer returned {} clusters over {} observations, expected {k} over {n}",
            partition.k(),
            partition.len()
        )));
    }
    ip_for_partition(input.dist, &partition, config, seed)
}

/// Step-wise search: try `k = 2, 3, ...` and stop at the first IP at or
/// above `alpha`, estimating `k - 1` clusters.
pub fn estimate_k(
    input: ClusterInput<'_>,
    clusterer: &dyn Clusterer,
    config: &IpConfig,
    seed: u64,
) -> Result<KEstimate> {
    config.validate()?;
    let n = input.dist.n();
    if n < 4 {
        return Err(Error::InvalidData(format!(
            "need at least 4 observations, got {n}"
        )));
    }
    let cap = config.max_k.min(n);
    let mut trajectory = Vec::new();
    for k in 2..=cap {
        let step = ip_for_k(input, clusterer, k, config, seed)?;
        let stop = step.ip >= config.alpha;
        trajectory.push(step);
        if stop {
            return Ok(KEstimate {
                k_hat: k - 1,
                trajectory,
                cap_reached: false,
            });
        }
    }
    Ok(KEstimate {
        k_hat: cap,
        trajectory,
        cap_reached: true,
    })
}
