//! Experiment runner: step-wise estimation on a user data set and seeded
//! replication studies over the simulated settings, both producing
//! serializable reports.
//!
//! Reports are deterministic for a fixed configuration. Wall-clock timings
//! are the one exception, so they are recorded only when asked for.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{Algorithm, Backend, ClusterConfig, ClusterInput, Partition};
use crate::comparators::{adjusted_rand_index, estimate_k_gap, gap_statistic, GapResult};
use crate::dataset::{
    load_csv, load_labeled_csv, pairwise_distances, DataMatrix, DistanceMatrix, Metric,
};
use crate::error::{Error, Result};
use crate::ip::{estimate_k, IpConfig, KEstimate};
use crate::seed::derive_seed;
use crate::simgen::{GeneratorSpec, Setting};

/// Default S2 group centers: three groups spaced `5` apart along the
/// all-ones direction.
pub const S2_DEFAULT_SPACING: f64 = 5.0;
/// Default S3 translation of the second group.
pub const S3_DEFAULT_SHIFT: [f64; 2] = [3.0, 3.0];

pub fn s2_default_centers() -> Vec<f64> {
    (0..3)
        .flat_map(|g| [S2_DEFAULT_SPACING * g as f64; 4])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapConfig {
    pub k_max: usize,
    pub n_refs: usize,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            k_max: 10,
            n_refs: 100,
        }
    }
}

/// Clustering, distance and index settings shared by both entry points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub ip: IpConfig,
    pub algorithm: Algorithm,
    pub cluster: ClusterConfig,
    pub metric: Metric,
    /// Also run the gap statistic when set.
    pub gap: Option<GapConfig>,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            ip: IpConfig::default(),
            algorithm: Algorithm::KMeans,
            cluster: ClusterConfig::default(),
            metric: Metric::Euclidean,
            gap: None,
        }
    }
}

impl MethodConfig {
    fn validate(&self) -> Result<()> {
        self.ip.validate()?;
        self.cluster.validate()?;
        if let Some(g) = self.gap {
            if g.k_max < 1 || g.n_refs < 1 {
                return Err(Error::InvalidParameter(
                    "gap k_max and n_refs must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Results of running every configured measure on one data set.
struct Analysis {
    estimate: KEstimate,
    gap: Option<GapResult>,
}

/// Sub-seeds: 1 clustering, 2 Monte Carlo tests, 3 gap references.
fn analyze(
    data: &DataMatrix,
    dist: &DistanceMatrix,
    method: &MethodConfig,
    seed: u64,
) -> Result<Analysis> {
    let backend = Backend {
        algorithm: method.algorithm,
        config: ClusterConfig {
            seed: derive_seed(seed, &[1]),
            ..method.cluster
        },
    };
    let input = ClusterInput { data, dist };
    let estimate = estimate_k(input, &backend, &method.ip, derive_seed(seed, &[2]))?;
    let gap = match method.gap {
        Some(g) => Some(gap_statistic(
            data,
            dist,
            &backend,
            g.k_max.min(data.n()),
            g.n_refs,
            derive_seed(seed, &[3]),
        )?),
        None => None,
    };
    Ok(Analysis { estimate, gap })
}

/// Partition with `k_hat` clusters chosen by the search; the trivial
/// partition when `k_hat = 1`.
pub fn selected_partition(estimate: &KEstimate, n: usize) -> Result<Partition> {
    if estimate.k_hat == 1 {
        return Partition::new(vec![0; n], 1);
    }
    estimate
        .trajectory
        .iter()
        .find(|s| s.k_tried == estimate.k_hat)
        .map(|s| s.partition.clone())
        .ok_or_else(|| {
            Error::InvalidData(format!("no partition recorded at k = {}", estimate.k_hat))
        })
}

// ---------------------------------------------------------------------------
// Single data set

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub input: PathBuf,
    pub has_header: bool,
    /// 0-based column holding true class labels, excluded from the features.
    pub label_column: Option<usize>,
    pub method: MethodConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub k: usize,
    pub ip: f64,
    pub skipped: usize,
    pub single_category: usize,
    /// 1-based cluster labels.
    pub labels: Vec<usize>,
    /// `null` where the observation was skipped.
    pub p_values: Vec<Option<f64>>,
    /// Agreement with the true labels, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub k_hat: usize,
    pub result: GapResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub config: EstimateConfig,
    pub n: usize,
    pub dim: usize,
    pub k_hat: usize,
    pub cap_reached: bool,
    pub trajectory: Vec<StepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapReport>,
}

/// Load `config.input` and estimate the number of clusters.
pub fn run_estimate(config: &EstimateConfig) -> Result<EstimateReport> {
    let (data, truth) = match config.label_column {
        Some(col) => {
            let (data, raw) = load_labeled_csv(&config.input, config.has_header, col)?;
            (data, Some(Partition::from_labels(&raw)?))
        }
        None => (load_csv(&config.input, config.has_header)?, None),
    };
    estimate_report(&data, truth.as_ref(), config)
}

/// Estimate on an in-memory data set; `config.input` is only echoed.
pub fn estimate_report(
    data: &DataMatrix,
    truth: Option<&Partition>,
    config: &EstimateConfig,
) -> Result<EstimateReport> {
    config.method.validate()?;
    if let Some(t) = truth {
        if t.len() != data.n() {
            return Err(Error::LengthMismatch {
                left: t.len(),
                right: data.n(),
            });
        }
    }
    let dist = pairwise_distances(data, config.method.metric);
    let analysis = analyze(data, &dist, &config.method, config.seed)?;
    let trajectory = analysis
        .estimate
        .trajectory
        .iter()
        .map(|s| {
            Ok(StepReport {
                k: s.k_tried,
                ip: s.ip,
                skipped: s.skipped,
                single_category: s.single_category,
                labels: s.partition.labels().iter().map(|l| l + 1).collect(),
                p_values: s.per_observation_p.clone(),
                ari: truth
                    .map(|t| adjusted_rand_index(t, &s.partition))
                    .transpose()?,
            })
        })
        .collect::<Result<_>>()?;
    let gap = analysis
        .gap
        .map(|result| {
            Ok::<_, Error>(GapReport {
                k_hat: estimate_k_gap(&result)?,
                result,
            })
        })
        .transpose()?;
    Ok(EstimateReport {
        config: config.clone(),
        n: data.n(),
        dim: data.dim(),
        k_hat: analysis.estimate.k_hat,
        cap_reached: analysis.estimate.cap_reached,
        trajectory,
        gap,
    })
}

// ---------------------------------------------------------------------------
// Replication studies

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Data generator; its `seed` is replaced per replication.
    pub generator: GeneratorSpec,
    pub replications: usize,
    pub method: MethodConfig,
    pub base_seed: u64,
    /// Record wall-clock seconds per replication. Makes reports
    /// non-reproducible byte for byte.
    pub record_timings: bool,
}

impl ExperimentConfig {
    /// Desk-scale defaults for `setting`: 25 replications (10 for the
    /// 300-dimensional settings), default separations for S2 and S3.
    pub fn for_setting(setting: Setting, base_seed: u64) -> Self {
        let mut generator = GeneratorSpec::for_setting(setting, 0);
        generator.shift = match setting {
            Setting::S2 => Some(s2_default_centers()),
            Setting::S3 => Some(S3_DEFAULT_SHIFT.to_vec()),
            _ => None,
        };
        let replications = match setting {
            Setting::S1aPrime | Setting::S1bPrime => 10,
            _ => 25,
        };
        Self {
            generator,
            replications,
            method: MethodConfig::default(),
            base_seed,
            record_timings: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        self.method.validate()
    }

    /// Seed of replication `rep`.
    pub fn replication_seed(&self, rep: usize) -> u64 {
        derive_seed(self.base_seed, &[rep as u64])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ip_k_hat: Option<usize>,
    pub cap_reached: bool,
    /// IP at each tried `k`, starting at 2.
    pub ip_trajectory: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_k_hat: Option<usize>,
    /// ARI between the selected partition and the truth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficacy {
    pub correct: usize,
    pub replications: usize,
    pub percent: f64,
}

impl Efficacy {
    /// Failed replications count as incorrect.
    pub fn from_estimates(
        estimates: impl Iterator<Item = Option<usize>>,
        truth: usize,
        replications: usize,
    ) -> Self {
        let correct = estimates.filter(|k| *k == Some(truth)).count();
        Self {
            correct,
            replications,
            percent: 100.0 * correct as f64 / replications as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficacyReport {
    pub config: ExperimentConfig,
    pub true_k: usize,
    pub ip: Efficacy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<Efficacy>,
    pub failures: usize,
    pub replications: Vec<Replication>,
}

impl EfficacyReport {
    pub fn ip_estimates(&self) -> Vec<Option<usize>> {
        self.replications.iter().map(|r| r.ip_k_hat).collect()
    }

    pub fn gap_estimates(&self) -> Vec<Option<usize>> {
        self.replications.iter().map(|r| r.gap_k_hat).collect()
    }
}

/// Run every replication of `config` in parallel. Errors inside a
/// replication are recorded on it; only an invalid config fails the study.
pub fn run_simulation(config: &ExperimentConfig) -> Result<EfficacyReport> {
    config.validate()?;
    let replications: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|rep| run_replication(config, rep))
        .collect();
    let true_k = config.generator.setting.true_k();
    let n = config.replications;
    let ip = Efficacy::from_estimates(replications.iter().map(|r| r.ip_k_hat), true_k, n);
    let gap = config
        .method
        .gap
        .map(|_| Efficacy::from_estimates(replications.iter().map(|r| r.gap_k_hat), true_k, n));
    Ok(EfficacyReport {
        config: config.clone(),
        true_k,
        ip,
        gap,
        failures: replications.iter().filter(|r| r.error.is_some()).count(),
        replications,
    })
}

fn run_replication(config: &ExperimentConfig, index: usize) -> Replication {
    let started = Instant::now();
    let seed = config.replication_seed(index);
    let mut rep = Replication {
        index,
        seed,
        ip_k_hat: None,
        cap_reached: false,
        ip_trajectory: Vec::new(),
        gap_k_hat: None,
        ari: None,
        error: None,
        seconds: None,
    };
    if let Err(e) = fill_replication(config, seed, &mut rep) {
        rep.error = Some(e.to_string());
    }
    if config.record_timings {
        rep.seconds = Some(started.elapsed().as_secs_f64());
    }
    rep
}

/// Sub-seeds: 0 data generation, 1 analysis.
fn fill_replication(config: &ExperimentConfig, seed: u64, rep: &mut Replication) -> Result<()> {
    let generator = GeneratorSpec {
        seed: derive_seed(seed, &[0]),
        ..config.generator.clone()
    };
    let (data, truth) = generator.generate()?;
    let dist = pairwise_distances(&data, config.method.metric);
    let analysis = analyze(&data, &dist, &config.method, derive_seed(seed, &[1]))?;
    let estimate = &analysis.estimate;
    rep.ip_k_hat = Some(estimate.k_hat);
    rep.cap_reached = estimate.cap_reached;
    rep.ip_trajectory = estimate.trajectory.iter().map(|s| s.ip).collect();
    rep.ari = Some(adjusted_rand_index(
        &truth,
        &selected_partition(estimate, data.n())?,
    )?);
    if let Some(g) = &analysis.gap {
        rep.gap_k_hat = Some(estimate_k_gap(g)?);
    }
    Ok(())
}
