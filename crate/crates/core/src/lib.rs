//! Estimating whether a data set is clustered, and into how many clusters,
//! from per-observation chi-square homogeneity tests on interpoint distances.
//!
//! The pipeline: compute a [`DistanceMatrix`], partition the data with any
//! [`Clusterer`] at `k = 2, 3, ...`, score each partition with the integrated
//! p-value ([`ip::ip_for_partition`]) and stop at the first `k` whose score
//! reaches `alpha` ([`ip::estimate_k`]).

pub mod cluster;
pub mod comparators;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod homogeneity;
pub mod ip;
pub mod seed;
pub mod simgen;

pub use cluster::{Algorithm, Backend, ClusterConfig, ClusterInput, Clusterer, Partition};
pub use dataset::{
    load_csv, load_labeled_csv, load_labels, pairwise_distances, DataMatrix, DistanceMatrix, Metric,
};
pub use error::{Error, Result};
pub use harness::{
    run_estimate, run_simulation, EfficacyReport, EstimateConfig, EstimateReport, ExperimentConfig,
    GapConfig, MethodConfig,
};
pub use homogeneity::{HomogeneityResult, PValueMethod, TestMode};
pub use ip::{estimate_k, IpConfig, IpStepResult, KEstimate, NearestRule};
pub use simgen::{GeneratorSpec, Setting};
