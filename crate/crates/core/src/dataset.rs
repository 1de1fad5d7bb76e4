//! Data ingestion, the data matrix and interpoint distances.

use std::fs::File;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` observations by `dim` real features, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    dim: usize,
}

impl DataMatrix {
    /// Build from row-major values. Requires `n >= 2`, `dim >= 1` and every
    /// entry finite.
    pub fn new(values: Vec<f64>, n: usize, dim: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if dim < 1 {
            return Err(Error::InvalidData("need at least 1 feature".into()));
        }
        if values.len() != n * dim {
            return Err(Error::InvalidData(format!(
                "{} values do not fill a {n}x{dim} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite entry at row {}, column {}",
                pos / dim + 1,
                pos % dim + 1
            )));
        }
        Ok(Self { values, n, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::RaggedRow {
                row: bad + 1,
                expected: dim,
                found: rows[bad].len(),
            });
        }
        Self::new(rows.concat(), rows.len(), dim)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// New matrix with the observations reordered so that row `r` of the
    /// result is row `order[r]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let values = order
            .iter()
            .flat_map(|&i| self.row(i).iter().copied())
            .collect();
        Self::new(values, order.len(), self.dim)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Symmetric `n x n` matrix of interpoint distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: Vec<f64>,
    n: usize,
    metric: Metric,
}

impl DistanceMatrix {
    /// Wrap a precomputed full matrix, checking every invariant.
    pub fn from_entries(entries: Vec<f64>, n: usize, metric: Metric) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidData(format!(
                "{} entries do not fill a {n}x{n} matrix",
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidData(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidData(format!(
                        "invalid distance {v} at ({i}, {j})"
                    )));
                }
                if v != entries[j * n + i] {
                    return Err(Error::InvalidData(format!(
                        "asymmetric entry at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { entries, n, metric })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

/// Full interpoint distance matrix under `metric`.
///
/// Each unordered pair is evaluated once and mirrored, so the result is
/// exactly symmetric and identical regardless of thread count.
pub fn pairwise_distances(data: &DataMatrix, metric: Metric) -> DistanceMatrix {
    let n = data.n();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = data.row(i);
            (i + 1..n)
                .map(|j| metric.distance(a, data.row(j)))
                .collect()
        })
        .collect();
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &d) in row.iter().enumerate() {
            let j = i + 1 + off;
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix { entries, n, metric }
}

/// Read a numeric CSV, one observation per row.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DataMatrix> {
    let (data, _) = read_csv(path.as_ref(), has_header, None)?;
    Ok(data)
}

/// Read a CSV where column `label_column` (0-based) holds a class label and
/// every other column is numeric. Returns the features and the raw labels.
pub fn load_labeled_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    label_column: usize,
) -> Result<(DataMatrix, Vec<String>)> {
    let (data, labels) = read_csv(path.as_ref(), has_header, Some(label_column))?;
    Ok((data, labels.unwrap_or_default()))
}

/// Read one column of raw labels (0-based `column`) from a CSV.
pub fn load_labels(path: impl AsRef<Path>, has_header: bool, column: usize) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let first_line = if has_header { 2 } else { 1 };
    let mut labels = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = first_line + idx;
        let record = record.map_err(|e| Error::Csv {
            row: line,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let cell = record.get(column).ok_or(Error::RaggedRow {
            row: line,
            expected: column + 1,
            found: record.len(),
        })?;
        labels.push(cell.to_string());
    }
    Ok(labels)
}

fn read_csv(
    path: &Path,
    has_header: bool,
    label_column: Option<usize>,
) -> Result<(DataMatrix, Option<Vec<String>>)> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let first_line = if has_header { 2 } else { 1 };
    let mut width = None;
    let mut values = Vec::new();
    let mut labels = label_column.map(|_| Vec::new());
    let mut n = 0;
    for (idx, record) in reader.records().enumerate() {
        let line = first_line + idx;
        let record = record.map_err(|e| Error::Csv {
            row: line,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row: line,
                expected,
                found: record.len(),
            });
        }
        if let Some(col) = label_column {
            if col >= record.len() {
                return Err(Error::InvalidParameter(format!(
                    "label column {} but rows have {} columns",
                    col + 1,
                    record.len()
                )));
            }
        }
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == label_column {
                if let Some(l) = labels.as_mut() {
                    l.push(cell.to_string());
                }
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::BadCell {
                        row: line,
                        column: c + 1,
                        cell: cell.to_string(),
                    })
                }
            }
        }
        n += 1;
    }
    let dim = width.unwrap_or(0) - usize::from(label_column.is_some());
    Ok((DataMatrix::new(values, n, dim)?, labels))
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_plain_csv() {
        let f = write_tmp("1,2\n3,4\n5,6");
        let d = load_csv(f.path(), false).unwrap();
        assert_eq!((d.n(), d.dim()), (3, 2));
        assert_eq!(d.values(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn header_and_scientific_notation() {
        let f = write_tmp("a,b\n1e-3, 2.5E2\n-3,4\n");
        let d = load_csv(f.path(), true).unwrap();
        assert_eq!(d.row(0), &[0.001, 250.0]);
        assert_eq!(d.n(), 2);
    }

    #[test]
    fn bad_cell_is_located() {
        let f = write_tmp("1,2\n3,abc\n");
        match load_csv(f.path(), false) {
            Err(Error::BadCell { row, column, cell }) => {
                assert_eq!((row, column, cell.as_str()), (2, 2, "abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_row_is_rejected() {
        let f = write_tmp("x,y\n1,2\n3\n");
        assert!(matches!(
            load_csv(f.path(), true),
            Err(Error::RaggedRow {
                row: 3,
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/x.csv", false),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn labeled_csv_splits_label_column() {
        let f = write_tmp("cls,a,b\ng,1,2\nc,3,4\n");
        let (d, labels) = load_labeled_csv(f.path(), true, 0).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(labels, vec!["g", "c"]);
    }

    #[test]
    fn label_column_only() {
        let f = write_tmp("1,x\n2,y\n\n2,z\n");
        assert_eq!(
            load_labels(f.path(), false, 1).unwrap(),
            vec!["x", "y", "z"]
        );
        assert!(matches!(
            load_labels(f.path(), false, 2),
            Err(Error::RaggedRow { row: 1, .. })
        ));
    }

    #[test]
    fn rejects_non_finite_and_tiny_inputs() {
        assert!(DataMatrix::new(vec![1.0, f64::NAN], 2, 1).is_err());
        assert!(DataMatrix::new(vec![1.0], 1, 1).is_err());
    }

    #[test]
    fn three_four_five() {
        let d = DataMatrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let m = pairwise_distances(&d, Metric::Euclidean);
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.get(1, 0), 5.0);
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(pairwise_distances(&d, Metric::Manhattan).get(0, 1), 7.0);
    }

    #[test]
    fn matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        let m = pairwise_distances(&data, Metric::Euclidean);
        for i in 0..5 {
            for j in 0..5 {
                let s: f64 = rows[i]
                    .iter()
                    .zip(&rows[j])
                    .map(|(x, y)| (x - y).powi(2))
                    .sum();
                assert!((m.get(i, j) - s.sqrt()).abs() < 1e-12);
            }
        }
        // Round-trips the invariant checks.
        DistanceMatrix::from_entries(m.entries.clone(), 5, Metric::Euclidean).unwrap();
    }

    fn points() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..12, 1usize..5).prop_flat_map(|(n, d)| {
            prop::collection::vec(prop::collection::vec(-100.0f64..100.0, d), n)
        })
    }

    proptest! {
        #[test]
        fn distance_matrix_invariants(rows in points(), manhattan in any::<bool>()) {
            let metric = if manhattan { Metric::Manhattan } else { Metric::Euclidean };
            let data = DataMatrix::from_rows(&rows).unwrap();
            let m = pairwise_distances(&data, metric);
            let n = rows.len();
            for i in 0..n {
                prop_assert_eq!(m.get(i, i), 0.0);
                for j in 0..n {
                    prop_assert!(m.get(i, j) >= 0.0 && m.get(i, j).is_finite());
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                    for k in 0..n {
                        prop_assert!(m.get(i, k) <= m.get(i, j) + m.get(j, k) + 1e-9);
                    }
                }
            }
        }

        #[test]
        fn permutation_is_consistent(rows in points(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let data = DataMatrix::from_rows(&rows).unwrap();
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let m = pairwise_distances(&data, Metric::Euclidean);
            let mp = pairwise_distances(&data.permuted(&order).unwrap(), Metric::Euclidean);
            for (a, &i) in order.iter().enumerate() {
                for (b, &j) in order.iter().enumerate() {
                    prop_assert_eq!(mp.get(a, b), m.get(i, j));
                }
            }
        }
    }
}
