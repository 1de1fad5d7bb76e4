use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ipclust::comparators::{adjusted_rand_index, estimate_k_gap, gap_statistic, GapResult};
use ipclust::{
    load_csv, load_labels, pairwise_distances, run_estimate, run_simulation, Algorithm, Backend,
    ClusterConfig, EstimateConfig, ExperimentConfig, GapConfig, GeneratorSpec, IpConfig,
    MethodConfig, Metric, NearestRule, Partition, Setting, TestMode,
};

/// Estimate the number of clusters in a data set with the integrated
/// p-value index, and run seeded simulation studies.
#[derive(Parser)]
#[command(name = "ipclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the number of clusters in a CSV data set.
    EstimateK(EstimateArgs),
    /// Run a replication study on a simulated setting.
    Simulate(SimulateArgs),
    /// Gap statistic for k = 1..k-max on a CSV data set.
    Gap(GapArgs),
    /// Adjusted Rand index between two label columns.
    Ari(AriArgs),
    /// Draw one data set of a simulated setting as CSV with a truth column.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct MethodArgs {
    /// Significance level of the step-wise search.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Bin parameter: distances fall into w - 1 categories.
    #[arg(long, default_value_t = 3)]
    w: usize,
    /// Monte Carlo replicates per homogeneity test.
    #[arg(long, default_value_t = 10_000)]
    b: usize,
    /// Largest number of clusters tried.
    #[arg(long, default_value_t = 10)]
    max_k: usize,
    /// kmeans or kmedoids.
    #[arg(long, default_value = "kmeans")]
    algorithm: Algorithm,
    /// mean or median.
    #[arg(long, default_value = "mean")]
    nearest: NearestRule,
    /// euclidean or manhattan.
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// auto, asymptotic or monte-carlo.
    #[arg(long, default_value = "auto")]
    mode: TestMode,
    /// K-means restarts.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
}

impl MethodArgs {
    fn config(&self, gap: Option<GapConfig>) -> MethodConfig {
        MethodConfig {
            ip: IpConfig {
                w: self.w,
                alpha: self.alpha,
                nearest_rule: self.nearest,
                b: self.b,
                max_k: self.max_k,
                mode: self.mode,
            },
            algorithm: self.algorithm,
            cluster: ClusterConfig {
                restarts: self.restarts,
                max_iterations: self.max_iterations,
                seed: 0,
            },
            metric: self.metric,
            gap,
        }
    }
}

#[derive(Args)]
struct GapFlags {
    /// Also compute the gap statistic.
    #[arg(long)]
    gap: bool,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    /// Number of reference data sets.
    #[arg(long, default_value_t = 100)]
    refs: usize,
}

impl GapFlags {
    fn config(&self) -> Option<GapConfig> {
        self.gap.then_some(GapConfig {
            k_max: self.k_max,
            n_refs: self.refs,
        })
    }
}

#[derive(Args)]
struct EstimateArgs {
    input: PathBuf,
    /// The first row is a header.
    #[arg(long)]
    header: bool,
    /// 1-based column with true labels, excluded from the features.
    #[arg(long)]
    label_column: Option<usize>,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    gap: GapFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// S1a, S1b, S1a', S1b', S2 or S3.
    #[arg(long)]
    setting: Setting,
    /// Replications (default 25, 10 for the 300-dimensional settings).
    #[arg(long)]
    reps: Option<usize>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    gap: GapFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock seconds per replication.
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    /// Rows per cluster.
    #[arg(long)]
    n_per: Option<usize>,
    /// Comma-separated shift (S1, S3) or concatenated group centers (S2).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    shift: Option<Vec<f64>>,
}

impl DataArgs {
    fn apply(&self, spec: &mut GeneratorSpec) {
        if let Some(n) = self.n_per {
            spec.n_per_cluster = n;
        }
        if let Some(s) = &self.shift {
            spec.shift = Some(s.clone());
        }
    }
}

#[derive(Args)]
struct GapArgs {
    input: PathBuf,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, default_value_t = 100)]
    refs: usize,
    #[arg(long, default_value = "kmeans")]
    algorithm: Algorithm,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AriArgs {
    left: PathBuf,
    right: PathBuf,
    #[arg(long)]
    header: bool,
    /// 1-based label column in LEFT.
    #[arg(long, default_value_t = 1)]
    left_column: usize,
    /// 1-based label column in RIGHT.
    #[arg(long, default_value_t = 1)]
    right_column: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    setting: Setting,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::EstimateK(a) => {
            let config = EstimateConfig {
                input: a.input.clone(),
                has_header: a.header,
                label_column: zero_based(a.label_column, "--label-column")?,
                method: a.method.config(a.gap.config()),
                seed: a.seed,
            };
            let report = run_estimate(&config)
                .with_context(|| format!("estimating k for {}", a.input.display()))?;
            write_json(a.out.as_deref(), &report)
        }
        Command::Simulate(a) => {
            let mut config = ExperimentConfig::for_setting(a.setting, a.seed);
            a.data.apply(&mut config.generator);
            if let Some(r) = a.reps {
                config.replications = r;
            }
            config.method = a.method.config(a.gap.config());
            config.record_timings = a.timings;
            let report = run_simulation(&config).context("running simulation")?;
            write_json(a.out.as_deref(), &report)
        }
        Command::Gap(a) => {
            let data = load_csv(&a.input, a.header)
                .with_context(|| format!("reading {}", a.input.display()))?;
            let dist = pairwise_distances(&data, a.metric);
            let backend = Backend {
                algorithm: a.algorithm,
                config: ClusterConfig::with_seed(a.seed),
            };
            let result = gap_statistic(&data, &dist, &backend, a.k_max, a.refs, a.seed)?;
            #[derive(Serialize)]
            struct Report {
                k_hat: usize,
                result: GapResult,
            }
            let k_hat = estimate_k_gap(&result)?;
            write_json(a.out.as_deref(), &Report { k_hat, result })
        }
        Command::Ari(a) => {
            let read = |path: &Path, col: usize, flag: &str| -> Result<Partition> {
                let col = zero_based(Some(col), flag)?.unwrap_or(0);
                let raw = load_labels(path, a.header, col)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(Partition::from_labels(&raw)?)
            };
            let left = read(&a.left, a.left_column, "--left-column")?;
            let right = read(&a.right, a.right_column, "--right-column")?;
            #[derive(Serialize)]
            struct Report {
                ari: f64,
            }
            write_json(
                a.out.as_deref(),
                &Report {
                    ari: adjusted_rand_index(&left, &right)?,
                },
            )
        }
        Command::Generate(a) => {
            let mut spec = ExperimentConfig::for_setting(a.setting, 0).generator;
            a.data.apply(&mut spec);
            spec.seed = a.seed;
            let (data, truth) = spec.generate()?;
            with_output(a.out.as_deref(), |w| {
                let header: Vec<String> = (1..=data.dim()).map(|j| format!("x{j}")).collect();
                writeln!(w, "{},label", header.join(","))?;
                for (row, label) in data.rows().zip(truth.labels()) {
                    let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    writeln!(w, "{},{}", cells.join(","), label + 1)?;
                }
                Ok(())
            })
        }
    }
}

fn zero_based(column: Option<usize>, flag: &str) -> Result<Option<usize>> {
    match column {
        Some(0) => bail!("{flag} is 1-based"),
        Some(c) => Ok(Some(c - 1)),
        None => Ok(None),
    }
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    with_output(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
