//! Chi-square test of homogeneity between two samples of distances.
//!
//! The two samples are scaled by the maximum of their union, binned into
//! `w - 1` equal-width categories over `(0, 1]` and compared with the usual
//! `2 x C` contingency-table statistic. P-values come either from the
//! chi-square approximation or from a Monte Carlo reference set of tables
//! sharing both observed margins.

use rand::Rng;
use rand_distr::{Distribution, Hypergeometric};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Smallest admissible bin parameter (a 2 x 2 table).
pub const MIN_W: usize = 3;

/// Expected cell count at or above which `TestMode::Auto` trusts the
/// chi-square approximation.
pub const MIN_EXPECTED: f64 = 5.0;

/// Replicate statistics within this relative margin of the observed one
/// count as ties.
const TIE_FACTOR: f64 = 1.0 - 64.0 * f64::EPSILON;

/// Two rows of category counts, one per sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinnedTable {
    counts: [Vec<u64>; 2],
    w: usize,
}

impl BinnedTable {
    pub fn new(row_a: Vec<u64>, row_b: Vec<u64>) -> Result<Self> {
        if row_a.len() != row_b.len() || row_a.len() + 1 < MIN_W {
            return Err(Error::InvalidParameter(format!(
                "table rows must share at least {} columns",
                MIN_W - 1
            )));
        }
        let w = row_a.len() + 1;
        Ok(Self {
            counts: [row_a, row_b],
            w,
        })
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.counts[r]
    }

    pub fn row_totals(&self) -> [u64; 2] {
        [self.counts[0].iter().sum(), self.counts[1].iter().sum()]
    }

    pub fn col_totals(&self) -> Vec<u64> {
        self.counts[0]
            .iter()
            .zip(&self.counts[1])
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn swapped(&self) -> Self {
        Self {
            counts: [self.counts[1].clone(), self.counts[0].clone()],
            w: self.w,
        }
    }

    /// Smallest expected count over the non-empty columns.
    pub fn min_expected(&self) -> f64 {
        let [r0, r1] = self.row_totals();
        let total = (r0 + r1) as f64;
        let rmin = r0.min(r1) as f64;
        self.col_totals()
            .into_iter()
            .filter(|&c| c > 0)
            .map(|c| rmin * c as f64 / total)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueMethod {
    Asymptotic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMode {
    /// Asymptotic when every expected count is at least 5, else Monte Carlo.
    #[default]
    Auto,
    Asymptotic,
    MonteCarlo,
}

impl std::str::FromStr for TestMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(TestMode::Auto),
            "asymptotic" => Ok(TestMode::Asymptotic),
            "monte-carlo" | "montecarlo" | "mc" => Ok(TestMode::MonteCarlo),
            other => Err(Error::InvalidParameter(format!(
                "unknown test mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub method: PValueMethod,
    /// Zero for asymptotic p-values.
    pub b_replicates: usize,
}

/// Divide both samples by the maximum over their union.
pub fn normalize_union(sample_a: &[f64], sample_b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::InvalidData("both samples must be non-empty".into()));
    }
    let mut max = 0.0f64;
    for &v in sample_a.iter().chain(sample_b) {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidData(format!("invalid distance {v}")));
        }
        max = max.max(v);
    }
    if max == 0.0 {
        return Err(Error::DegenerateDistances);
    }
    let scale = |s: &[f64]| s.iter().map(|v| v / max).collect::<Vec<_>>();
    Ok((scale(sample_a), scale(sample_b)))
}

/// Category of a normalized value: interval `j` (0-based) is
/// `(j/(w-1), (j+1)/(w-1)]`, with exact zeros in the first interval.
pub fn category(value: f64, w: usize) -> usize {
    let cats = w - 1;
    if value <= 0.0 {
        return 0;
    }
    let idx = (value * cats as f64).ceil() as usize;
    idx.clamp(1, cats) - 1
}

pub fn bin_counts(normalized_a: &[f64], normalized_b: &[f64], w: usize) -> Result<BinnedTable> {
    if w < MIN_W {
        return Err(Error::InvalidParameter(format!(
            "w must be at least {MIN_W}, got {w}"
        )));
    }
    let count = |s: &[f64]| {
        let mut row = vec![0u64; w - 1];
        for &v in s {
            row[category(v, w)] += 1;
        }
        row
    };
    BinnedTable::new(count(normalized_a), count(normalized_b))
}

/// Pearson statistic over the non-empty columns, and its degrees of freedom
/// (non-empty columns minus one).
pub fn chi_square_stat(table: &BinnedTable) -> Result<(f64, usize)> {
    let [r0, r1] = table.row_totals();
    if r0 == 0 || r1 == 0 {
        return Err(Error::DegenerateTable);
    }
    let cols = table.col_totals();
    let used = cols.iter().filter(|&&c| c > 0).count();
    if used < 2 {
        return Err(Error::DegenerateTable);
    }
    Ok((statistic(table.row(0), &cols, r0, r1), used - 1))
}

/// Pearson statistic given the first row and the margins. Empty columns are
/// skipped. The second row is implied by the column totals.
fn statistic(row_a: &[u64], cols: &[u64], r0: u64, r1: u64) -> f64 {
    let total = (r0 + r1) as f64;
    let (fa, fb) = (r0 as f64 / total, r1 as f64 / total);
    let mut stat = 0.0;
    for (&a, &c) in row_a.iter().zip(cols) {
        if c == 0 {
            continue;
        }
        let c = c as f64;
        let (ea, eb) = (fa * c, fb * c);
        let a = a as f64;
        let b = c - a;
        stat += (a - ea) * (a - ea) / ea + (b - eb) * (b - eb) / eb;
    }
    stat
}

/// Upper-tail probability of the chi-square distribution.
pub fn p_value_asymptotic(statistic: f64, df: usize) -> Result<f64> {
    if df == 0 || statistic.is_nan() || statistic < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need statistic >= 0 and df >= 1, got {statistic}, {df}"
        )));
    }
    if statistic == 0.0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new(df as f64).expect("df >= 1 is a valid shape");
    Ok(dist.sf(statistic).clamp(0.0, 1.0))
}

/// Monte Carlo p-value `(1 + #{T* >= T}) / (b + 1)` over `b` random tables
/// with the observed row and column totals.
pub fn p_value_monte_carlo(table: &BinnedTable, b: usize, seed: u64) -> Result<f64> {
    if b == 0 {
        return Err(Error::InvalidParameter(
            "need at least one replicate".into(),
        ));
    }
    let (observed, _) = chi_square_stat(table)?;
    let [r0, r1] = table.row_totals();
    let cols: Vec<u64> = table.col_totals().into_iter().filter(|&c| c > 0).collect();
    let threshold = observed * TIE_FACTOR;

    let mut sampler = MarginSampler::new(&cols, r0);
    let mut rng = rng_for(seed, &[]);
    let mut row = vec![0u64; cols.len()];
    let mut hits = 0usize;
    for _ in 0..b {
        sampler.fill(&mut rng, &mut row);
        if statistic(&row, &cols, r0, r1) >= threshold {
            hits += 1;
        }
    }
    Ok((1 + hits) as f64 / (b + 1) as f64)
}

/// Draws the first row of a `2 x C` table uniformly among tables with fixed
/// margins, one hypergeometric draw per column.
pub struct MarginSampler<'a> {
    cols: &'a [u64],
    row_total: u64,
    // cache[j][remaining row total] for columns before the last
    cache: Vec<Vec<Option<Hypergeometric>>>,
}

impl<'a> MarginSampler<'a> {
    pub fn new(cols: &'a [u64], row_total: u64) -> Self {
        let cache = cols
            .iter()
            .take(cols.len().saturating_sub(1))
            .map(|_| vec![None; row_total as usize + 1])
            .collect();
        Self {
            cols,
            row_total,
            cache,
        }
    }

    pub fn fill(&mut self, rng: &mut impl Rng, row: &mut [u64]) {
        let mut left_total: u64 = self.cols.iter().sum();
        let mut left_row = self.row_total;
        let last = self.cols.len() - 1;
        for (j, &c) in self.cols.iter().enumerate() {
            let x = if j == last || left_row == 0 {
                left_row.min(c)
            } else {
                let dist = self.cache[j][left_row as usize].get_or_insert_with(|| {
                    Hypergeometric::new(left_total, left_row, c).expect("margins are consistent")
                });
                dist.sample(rng)
            };
            row[j] = x;
            left_row -= x;
            left_total -= c;
        }
    }
}

/// Full test: normalize, bin, compute the statistic and a p-value.
pub fn homogeneity_test(
    sample_a: &[f64],
    sample_b: &[f64],
    w: usize,
    mode: TestMode,
    b: usize,
    seed: u64,
) -> Result<HomogeneityResult> {
    let (na, nb) = normalize_union(sample_a, sample_b)?;
    let table = bin_counts(&na, &nb, w)?;
    let (statistic, df) = chi_square_stat(&table)?;
    let method = match mode {
        TestMode::Asymptotic => PValueMethod::Asymptotic,
        TestMode::MonteCarlo => PValueMethod::MonteCarlo,
        TestMode::Auto if table.min_expected() >= MIN_EXPECTED => PValueMethod::Asymptotic,
        TestMode::Auto => PValueMethod::MonteCarlo,
    };
    let (p_value, b_replicates) = match method {
        PValueMethod::Asymptotic => (p_value_asymptotic(statistic, df)?, 0),
        PValueMethod::MonteCarlo => (p_value_monte_carlo(&table, b, seed)?, b),
    };
    Ok(HomogeneityResult {
        statistic,
        df,
        p_value,
        method,
        b_replicates,
    })
}
