//! Comparator measures: the gap statistic and the adjusted Rand index.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{within_dispersion, ClusterInput, Clusterer, Partition};
use crate::dataset::{pairwise_distances, DataMatrix, DistanceMatrix};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub k_values: Vec<usize>,
    pub gap: Vec<f64>,
    pub log_w: Vec<f64>,
    pub ref_log_w_mean: Vec<f64>,
    pub ref_log_w_sd: Vec<f64>,
    pub n_refs: usize,
}

/// Gap statistic for `k = 1..=k_max`.
///
/// Reference sets are drawn uniformly from the bounding box of the data in
/// its principal-axis frame (after centering) and rotated back. Dispersion
/// uses the same metric as `dist`.
pub fn gap_statistic(
    data: &DataMatrix,
    dist: &DistanceMatrix,
    clusterer: &dyn Clusterer,
    k_max: usize,
    n_refs: usize,
    seed: u64,
) -> Result<GapResult> {
    if k_max < 1 || n_refs < 1 {
        return Err(Error::InvalidParameter(
            "k_max and n_refs must be at least 1".into(),
        ));
    }
    if k_max > data.n() {
        return Err(Error::KOutOfRange {
            k: k_max,
            n: data.n(),
            min: 1,
        });
    }
    let box_ = ReferenceBox::fit(data)?;
    let log_w = log_dispersions(data, dist, clusterer, k_max)?;
    let refs: Vec<Vec<f64>> = (0..n_refs)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(seed, &[b as u64]);
            let sample = box_.sample(data.n(), &mut rng)?;
            let ref_dist = pairwise_distances(&sample, dist.metric());
            log_dispersions(&sample, &ref_dist, clusterer, k_max)
        })
        .collect::<Result<_>>()?;

    let mut gap = Vec::with_capacity(k_max);
    let mut ref_mean = Vec::with_capacity(k_max);
    let mut ref_sd = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let vals: Vec<f64> = refs.iter().map(|r| r[k]).collect();
        let mean = vals.iter().sum::<f64>() / n_refs as f64;
        let var = if n_refs > 1 {
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_refs - 1) as f64
        } else {
            0.0
        };
        gap.push(mean - log_w[k]);
        ref_mean.push(mean);
        ref_sd.push(var.sqrt());
    }
    Ok(GapResult {
        k_values: (1..=k_max).collect(),
        gap,
        log_w,
        ref_log_w_mean: ref_mean,
        ref_log_w_sd: ref_sd,
        n_refs,
    })
}

fn log_dispersions(
    data: &DataMatrix,
    dist: &DistanceMatrix,
    clusterer: &dyn Clusterer,
    k_max: usize,
) -> Result<Vec<f64>> {
    (1..=k_max)
        .map(|k| {
            let partition = if k == 1 {
                Partition::new(vec![0; data.n()], 1)?
            } else {
                clusterer.cluster(ClusterInput { data, dist }, k)?
            };
            let w = within_dispersion(dist, &partition);
            if w <= 0.0 {
                return Err(Error::InvalidData(format!(
                    "zero within-cluster dispersion at k = {k}"
                )));
            }
            Ok(w.ln())
        })
        .collect()
}

/// Bounding box of centered data in its principal-axis coordinates.
#[derive(Debug, Clone)]
pub struct ReferenceBox {
    mean: Vec<f64>,
    /// Rows are principal axes (`r x dim`).
    axes: DMatrix<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ReferenceBox {
    pub fn fit(data: &DataMatrix) -> Result<Self> {
        let (n, d) = (data.n(), data.dim());
        let mut mean = vec![0.0; d];
        for row in data.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n as f64;
            }
        }
        let centered = DMatrix::from_fn(n, d, |i, j| data.row(i)[j] - mean[j]);
        let svd = centered.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let scale = svd.singular_values.max();
        if scale <= 0.0 {
            return Err(Error::InvalidData(
                "data has zero variance along every axis".into(),
            ));
        }
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&r| svd.singular_values[r] > scale * 1e-12)
            .collect();
        let axes = v_t.select_rows(&keep);
        let proj = &centered * axes.transpose();
        let lo = (0..keep.len()).map(|c| proj.column(c).min()).collect();
        let hi = (0..keep.len()).map(|c| proj.column(c).max()).collect();
        Ok(Self { mean, axes, lo, hi })
    }

    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<DataMatrix> {
        let r = self.lo.len();
        let z = DMatrix::from_fn(n, r, |_, c| {
            if self.hi[c] > self.lo[c] {
                rng.random_range(self.lo[c]..self.hi[c])
            } else {
                self.lo[c]
            }
        });
        let back = z * &self.axes;
        let d = self.mean.len();
        let mut values = Vec::with_capacity(n * d);
        for i in 0..n {
            values.extend((0..d).map(|j| back[(i, j)] + self.mean[j]));
        }
        DataMatrix::new(values, n, d)
    }

    /// Coordinates of a point in the principal-axis frame.
    pub fn project(&self, point: &[f64]) -> Vec<f64> {
        (0..self.axes.nrows())
            .map(|r| {
                point
                    .iter()
                    .zip(&self.mean)
                    .enumerate()
                    .map(|(j, (x, m))| (x - m) * self.axes[(r, j)])
                    .sum()
            })
            .collect()
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }
}

/// The `k` with the largest gap; ties go to the smallest `k`.
pub fn estimate_k_gap(result: &GapResult) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&k, &g) in result.k_values.iter().zip(&result.gap) {
        if best.map_or(true, |(_, bg)| g > bg) {
            best = Some((k, g));
        }
    }
    best.map(|b| b.0)
        .ok_or_else(|| Error::InvalidData("empty gap result".into()))
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Hubert–Arabie adjusted Rand index.
pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch {
            left: p1.len(),
            right: p2.len(),
        });
    }
    let mut table = vec![0u64; p1.k() * p2.k()];
    for (&a, &b) in p1.labels().iter().zip(p2.labels()) {
        table[a * p2.k() + b] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let rows: f64 = p1.sizes().iter().map(|&s| choose2(s as u64)).sum();
    let cols: f64 = p2.sizes().iter().map(|&s| choose2(s as u64)).sum();
    let expected = rows * cols / choose2(p1.len() as u64);
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::cluster::{Backend, ClusterConfig};
    use crate::dataset::Metric;

    fn gap_of(values: &[f64]) -> GapResult {
        GapResult {
            k_values: (1..=values.len()).collect(),
            gap: values.to_vec(),
            log_w: vec![0.0; values.len()],
            ref_log_w_mean: vec![0.0; values.len()],
            ref_log_w_sd: vec![0.0; values.len()],
            n_refs: 1,
        }
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(estimate_k_gap(&gap_of(&[0.1, 0.5, 0.3])).unwrap(), 2);
        assert_eq!(estimate_k_gap(&gap_of(&[0.5, 0.5])).unwrap(), 1);
        assert!(estimate_k_gap(&gap_of(&[])).is_err());
    }

    proptest! {
        #[test]
        fn argmax_matches_scan(values in prop::collection::vec(-5.0f64..5.0, 1..12)) {
            let mut best = 0;
            for i in 1..values.len() {
                if values[i] > values[best] { best = i; }
            }
            prop_assert_eq!(estimate_k_gap(&gap_of(&values)).unwrap(), best + 1);
        }

        #[test]
        fn ari_symmetric_and_label_invariant(
            a in prop::collection::vec(0usize..4, 12),
            b in prop::collection::vec(0usize..3, 12),
        ) {
            let p = Partition::from_labels(&a).unwrap();
            let q = Partition::from_labels(&b).unwrap();
            let x = adjusted_rand_index(&p, &q).unwrap();
            prop_assert!((x - adjusted_rand_index(&q, &p).unwrap()).abs() < 1e-12);
            let relabeled: Vec<usize> = a.iter().map(|l| 10 - l).collect();
            let pr = Partition::from_labels(&relabeled).unwrap();
            prop_assert!((x - adjusted_rand_index(&pr, &q).unwrap()).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&x));
            prop_assert!((adjusted_rand_index(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ari_examples() {
        let p = Partition::new(vec![0, 0, 1, 1, 2, 2], 3).unwrap();
        let q = Partition::new(vec![2, 2, 0, 0, 1, 1], 3).unwrap();
        assert_eq!(adjusted_rand_index(&p, &q).unwrap(), 1.0);
        // Known value: sklearn's adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714...
        let a = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let b = Partition::new(vec![0, 0, 1, 2], 3).unwrap();
        assert!((adjusted_rand_index(&a, &b).unwrap() - 4.0 / 7.0).abs() < 1e-12);
        let short = Partition::new(vec![0, 1], 2).unwrap();
        assert!(adjusted_rand_index(&a, &short).is_err());
    }

    #[test]
    fn gap_k1_uses_total_dispersion_and_refs_stay_in_box() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                vec![
                    (i as f64 * 0.37).sin() * 3.0,
                    (i as f64 * 1.3).cos() + i as f64 * 0.1,
                ]
            })
            .collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        let dist = pairwise_distances(&data, Metric::Euclidean);
        let backend = Backend::kmeans(ClusterConfig::default());
        let g = gap_statistic(&data, &dist, &backend, 3, 5, 1).unwrap();
        let whole = Partition::new(vec![0; 30], 1).unwrap();
        assert!((g.log_w[0] - within_dispersion(&dist, &whole).ln()).abs() < 1e-12);
        assert_eq!(g, gap_statistic(&data, &dist, &backend, 3, 5, 1).unwrap());

        let bx = ReferenceBox::fit(&data).unwrap();
        let (lo, hi) = bx.bounds();
        let mut rng = rng_for(3, &[]);
        let sample = bx.sample(200, &mut rng).unwrap();
        for row in sample.rows() {
            for (c, z) in bx.project(row).iter().enumerate() {
                assert!(*z >= lo[c] - 1e-9 && *z <= hi[c] + 1e-9);
            }
        }
    }

    #[test]
    fn constant_data_is_degenerate() {
        let data = DataMatrix::from_rows(&vec![vec![2.0, 2.0]; 5]).unwrap();
        assert!(ReferenceBox::fit(&data).is_err());
    }
}
