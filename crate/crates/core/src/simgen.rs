//! Seeded generators for the simulation settings.
//!
//! * S1: equicorrelated multivariate normal, optionally with half the rows
//!   shifted by `(0, 1, -1, 3, -3)` (tiled in 300 dimensions).
//! * S2: three groups of correlated non-normal data built with the Fleishman
//!   power method and the Vale–Maurelli intermediate correlation.
//! * S3: two groups of independent exponential coordinates.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cluster::Partition;
use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::seed::rng_for;

pub const S1_SHIFT: [f64; 5] = [0.0, 1.0, -1.0, 3.0, -3.0];

/// Lower-triangular factor of the `dim x dim` equicorrelation matrix.
fn equicorrelation_factor(dim: usize, rho: f64) -> Result<DMatrix<f64>> {
    if !(rho > -1.0 && rho < 1.0) || (dim > 1 && rho <= -1.0 / (dim as f64 - 1.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let corr = DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { rho });
    corr.cholesky()
        .map(|c| c.l())
        .ok_or(Error::NotPositiveDefinite)
}

/// Rows of `n` correlated standard normals: `z L^T` for i.i.d. `z`.
fn correlated_normals(n: usize, factor: &DMatrix<f64>, rng: &mut impl Rng) -> Vec<f64> {
    let d = factor.nrows();
    let mut out = Vec::with_capacity(n * d);
    let mut z = vec![0.0; d];
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
        for i in 0..d {
            let mut s = 0.0;
            for j in 0..=i {
                s += factor[(i, j)] * z[j];
            }
            out.push(s);
        }
    }
    out
}

/// `n` draws from `N(mean, R)` with `R` the equicorrelation matrix.
pub fn gen_mvn(
    n: usize,
    dim: usize,
    off_diag_corr: f64,
    mean: &[f64],
    seed: u64,
) -> Result<DataMatrix> {
    if mean.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "mean has {} entries, expected {dim}",
            mean.len()
        )));
    }
    let factor = equicorrelation_factor(dim, off_diag_corr)?;
    let mut rng = rng_for(seed, &[]);
    let mut values = correlated_normals(n, &factor, &mut rng);
    for row in values.chunks_exact_mut(dim) {
        row.iter_mut().zip(mean).for_each(|(v, m)| *v += m);
    }
    DataMatrix::new(values, n, dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum S1Case {
    /// One 5-dimensional cluster.
    A,
    /// Two 5-dimensional clusters.
    B,
    /// One 300-dimensional cluster.
    APrime,
    /// Two 300-dimensional clusters.
    BPrime,
}

impl S1Case {
    pub fn dim(self) -> usize {
        match self {
            S1Case::A | S1Case::B => 5,
            S1Case::APrime | S1Case::BPrime => 300,
        }
    }

    pub fn true_k(self) -> usize {
        match self {
            S1Case::A | S1Case::APrime => 1,
            S1Case::B | S1Case::BPrime => 2,
        }
    }
}

/// Shift vector of length `dim` repeating [`S1_SHIFT`].
pub fn tiled_shift(dim: usize) -> Vec<f64> {
    (0..dim).map(|j| S1_SHIFT[j % S1_SHIFT.len()]).collect()
}

/// S1 data: `2 * n_per` rows with equicorrelation `corr`; in the two-cluster
/// cases the second half is shifted.
pub fn gen_s1_with(
    case: S1Case,
    n_per: usize,
    corr: f64,
    seed: u64,
) -> Result<(DataMatrix, Partition)> {
    let dim = case.dim();
    let n = 2 * n_per;
    let base = gen_mvn(n, dim, corr, &vec![0.0; dim], seed)?;
    if case.true_k() == 1 {
        return Ok((base, Partition::new(vec![0; n], 1)?));
    }
    let shift = tiled_shift(dim);
    let mut values = base.values().to_vec();
    for row in values.chunks_exact_mut(dim).skip(n_per) {
        row.iter_mut().zip(&shift).for_each(|(v, s)| *v += s);
    }
    let labels = (0..n).map(|i| usize::from(i >= n_per)).collect();
    Ok((DataMatrix::new(values, n, dim)?, Partition::new(labels, 2)?))
}

/// S1 at its standard size: 250 rows, correlation 0.5.
pub fn gen_s1(case: S1Case, seed: u64) -> Result<(DataMatrix, Partition)> {
    gen_s1_with(case, 125, 0.5, seed)
}

/// Coefficients `(a, b, c, d)` of `Y = a + bZ + cZ^2 + dZ^3`, `a = -c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fleishman {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Fleishman {
    pub fn apply(&self, z: f64) -> f64 {
        self.a + z * (self.b + z * (self.c + z * self.d))
    }

    /// Residuals of the variance, skewness and excess-kurtosis equations.
    pub fn residuals(&self, skew: f64, excess_kurtosis: f64) -> [f64; 3] {
        moment_system(self.b, self.c, self.d, skew, excess_kurtosis)
    }
}

fn moment_system(b: f64, c: f64, d: f64, skew: f64, kurt: f64) -> [f64; 3] {
    let (b2, c2, d2) = (b * b, c * c, d * d);
    let bd = b * d;
    [
        b2 + 6.0 * bd + 2.0 * c2 + 15.0 * d2 - 1.0,
        2.0 * c * (b2 + 24.0 * bd + 105.0 * d2 + 2.0) - skew,
        24.0 * (bd
            + c2 * (1.0 + b2 + 28.0 * bd)
            + d2 * (12.0 + 48.0 * bd + 141.0 * c2 + 225.0 * d2))
            - kurt,
    ]
}

fn moment_jacobian(b: f64, c: f64, d: f64) -> [[f64; 3]; 3] {
    let (b2, c2, d2) = (b * b, c * c, d * d);
    let bd = b * d;
    [
        [2.0 * b + 6.0 * d, 4.0 * c, 6.0 * b + 30.0 * d],
        [
            2.0 * c * (2.0 * b + 24.0 * d),
            2.0 * (b2 + 24.0 * bd + 105.0 * d2 + 2.0),
            2.0 * c * (24.0 * b + 210.0 * d),
        ],
        [
            24.0 * (d + c2 * (2.0 * b + 28.0 * d) + d2 * 48.0 * d),
            24.0 * (2.0 * c * (1.0 + b2 + 28.0 * bd) + d2 * 282.0 * c),
            24.0 * (b
                + c2 * 28.0 * b
                + 2.0 * d * (12.0 + 48.0 * bd + 141.0 * c2 + 225.0 * d2)
                + d2 * (48.0 * b + 450.0 * d)),
        ],
    ]
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let a = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    let x = a.lu().solve(&nalgebra::Vector3::from(r))?;
    Some([x[0], x[1], x[2]])
}

fn norm(r: &[f64; 3]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Fleishman power-method coefficients for a target skewness and excess
/// kurtosis, solved by damped Newton iteration to a residual below 1e-10.
pub fn fleishman_coefficients(skew: f64, excess_kurtosis: f64) -> Result<Fleishman> {
    // No distribution at all has kurtosis below skew^2 + 1.
    if excess_kurtosis < skew * skew - 2.0 {
        return Err(Error::InfeasibleMoments {
            skew,
            excess_kurtosis,
        });
    }
    let starts = [
        [1.0, 0.0, 0.0],
        [0.9, skew / 6.0, 0.0],
        [0.8, skew / 8.0, 0.05],
        [1.1, skew / 4.0, -0.05],
    ];
    for start in starts {
        if let Some([b, c, d]) = newton(start, skew, excess_kurtosis) {
            let coef = Fleishman { a: -c, b, c, d };
            if norm(&coef.residuals(skew, excess_kurtosis)) < 1e-10 {
                return Ok(coef);
            }
        }
    }
    // Outside (an approximation of) the power method's reachable region.
    if excess_kurtosis < 1.5 * skew * skew - 1.2264 {
        return Err(Error::InfeasibleMoments {
            skew,
            excess_kurtosis,
        });
    }
    Err(Error::NoConvergence(format!(
        "Fleishman system for skewness {skew}, excess kurtosis {excess_kurtosis}"
    )))
}

fn newton(start: [f64; 3], skew: f64, kurt: f64) -> Option<[f64; 3]> {
    let mut x = start;
    let mut r = moment_system(x[0], x[1], x[2], skew, kurt);
    for _ in 0..200 {
        if norm(&r) < 1e-13 {
            break;
        }
        let step = solve3(moment_jacobian(x[0], x[1], x[2]), r)?;
        let mut t = 1.0;
        loop {
            let cand = [x[0] - t * step[0], x[1] - t * step[1], x[2] - t * step[2]];
            let rc = moment_system(cand[0], cand[1], cand[2], skew, kurt);
            if norm(&rc) < norm(&r) || t < 1e-6 {
                x = cand;
                r = rc;
                break;
            }
            t *= 0.5;
        }
    }
    (x[0] > 0.0 && x.iter().all(|v| v.is_finite())).then_some(x)
}

/// Correlation between two normals that, after the power transform,
/// yields correlation `target`.
pub fn intermediate_correlation(coef: &Fleishman, target: f64) -> Result<f64> {
    let Fleishman { b, c, d, .. } = *coef;
    let f = |r: f64| {
        r * (b * b + 6.0 * b * d + 9.0 * d * d) + r * r * 2.0 * c * c + r.powi(3) * 6.0 * d * d
            - target
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target correlation {target} unreachable: intermediate correlation outside (-1, 1)"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    if r.abs() >= 1.0 {
        return Err(Error::InvalidParameter(
            "intermediate correlation outside (-1, 1)".into(),
        ));
    }
    Ok(r)
}

/// Vale–Maurelli draws: correlated normals at the intermediate correlation
/// pushed through the Fleishman polynomial coordinate-wise.
pub fn gen_vale_maurelli(
    n: usize,
    dim: usize,
    off_diag_corr: f64,
    skew: f64,
    excess_kurtosis: f64,
    seed: u64,
) -> Result<DataMatrix> {
    let coef = fleishman_coefficients(skew, excess_kurtosis)?;
    let r = if dim > 1 {
        intermediate_correlation(&coef, off_diag_corr)?
    } else {
        0.0
    };
    let factor = equicorrelation_factor(dim, r)?;
    let mut rng = rng_for(seed, &[]);
    let values = correlated_normals(n, &factor, &mut rng)
        .into_iter()
        .map(|z| coef.apply(z))
        .collect();
    DataMatrix::new(values, n, dim)
}

/// Three groups of `n_per` Vale–Maurelli rows (4 dimensions, correlation
/// 0.6), group `g` translated by `centers[g]`.
pub fn gen_s2(
    n_per: usize,
    skew: f64,
    excess_kurtosis: f64,
    centers: &[Vec<f64>],
    seed: u64,
) -> Result<(DataMatrix, Partition)> {
    const DIM: usize = 4;
    if centers.is_empty() || centers.iter().any(|c| c.len() != DIM) {
        return Err(Error::InvalidParameter(format!(
            "S2 centers must be {DIM}-vectors"
        )));
    }
    let base = gen_vale_maurelli(n_per * centers.len(), DIM, 0.6, skew, excess_kurtosis, seed)?;
    let mut values = base.values().to_vec();
    for (i, row) in values.chunks_exact_mut(DIM).enumerate() {
        row.iter_mut()
            .zip(&centers[i / n_per])
            .for_each(|(v, s)| *v += s);
    }
    let labels = (0..n_per * centers.len()).map(|i| i / n_per).collect();
    Ok((
        DataMatrix::new(values, n_per * centers.len(), DIM)?,
        Partition::new(labels, centers.len())?,
    ))
}

/// Two groups of `n_per` bivariate i.i.d. exponential(`rate`) rows, the
/// second translated by `shift`.
pub fn gen_s3(
    n_per: usize,
    rate: f64,
    shift: &[f64],
    seed: u64,
) -> Result<(DataMatrix, Partition)> {
    if n_per == 0 || shift.len() != 2 {
        return Err(Error::InvalidParameter(
            "S3 needs n_per >= 1 and a 2-vector shift".into(),
        ));
    }
    let exp = Exp::new(rate).map_err(|e| Error::InvalidParameter(format!("rate {rate}: {e}")))?;
    let mut rng = rng_for(seed, &[]);
    let mut values = Vec::with_capacity(4 * n_per);
    for i in 0..2 * n_per {
        for s in shift {
            let x: f64 = exp.sample(&mut rng);
            values.push(if i >= n_per { x + s } else { x });
        }
    }
    let labels = (0..2 * n_per).map(|i| usize::from(i >= n_per)).collect();
    Ok((
        DataMatrix::new(values, 2 * n_per, 2)?,
        Partition::new(labels, 2)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setting {
    S1a,
    S1b,
    #[serde(rename = "S1a'")]
    S1aPrime,
    #[serde(rename = "S1b'")]
    S1bPrime,
    S2,
    S3,
}

impl Setting {
    pub fn true_k(self) -> usize {
        match self {
            Setting::S1a | Setting::S1aPrime => 1,
            Setting::S1b | Setting::S1bPrime | Setting::S3 => 2,
            Setting::S2 => 3,
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace("prime", "'").as_str() {
            "s1a" => Ok(Setting::S1a),
            "s1b" => Ok(Setting::S1b),
            "s1a'" => Ok(Setting::S1aPrime),
            "s1b'" => Ok(Setting::S1bPrime),
            "s2" => Ok(Setting::S2),
            "s3" => Ok(Setting::S3),
            other => Err(Error::InvalidParameter(format!(
                "unknown setting {other:?}"
            ))),
        }
    }
}

/// Everything needed to draw one data set of a setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub setting: Setting,
    pub n_per_cluster: usize,
    pub dim: usize,
    pub seed: u64,
    /// S1: shift of the second half (defaults to the tiled S1 shift).
    /// S2: concatenated group centers, 4 per group.
    /// S3: translation of the second group.
    pub shift: Option<Vec<f64>>,
    pub correlation: f64,
    pub skewness: f64,
    /// Excess kurtosis (normal = 0).
    pub kurtosis: f64,
    pub rate: f64,
}

impl GeneratorSpec {
    /// Standard sizes and marginals. S2 centers and the S3 shift are not
    /// fixed by the setting and must be supplied via `shift`.
    pub fn for_setting(setting: Setting, seed: u64) -> Self {
        let (n_per_cluster, dim, correlation) = match setting {
            Setting::S1a | Setting::S1b => (125, 5, 0.5),
            Setting::S1aPrime | Setting::S1bPrime => (125, 300, 0.5),
            Setting::S2 => (200, 4, 0.6),
            Setting::S3 => (250, 2, 0.0),
        };
        Self {
            setting,
            n_per_cluster,
            dim,
            seed,
            shift: None,
            correlation,
            skewness: 1.75,
            kurtosis: 3.75,
            rate: 1.0,
        }
    }

    pub fn generate(&self) -> Result<(DataMatrix, Partition)> {
        let missing =
            |what: &str| Error::InvalidParameter(format!("{what} requires an explicit shift"));
        match self.setting {
            Setting::S1a | Setting::S1b | Setting::S1aPrime | Setting::S1bPrime => {
                let n = 2 * self.n_per_cluster;
                let base = gen_mvn(
                    n,
                    self.dim,
                    self.correlation,
                    &vec![0.0; self.dim],
                    self.seed,
                )?;
                if self.setting == Setting::S1a || self.setting == Setting::S1aPrime {
                    return Ok((base, Partition::new(vec![0; n], 1)?));
                }
                let shift = self.shift.clone().unwrap_or_else(|| tiled_shift(self.dim));
                if shift.len() != self.dim {
                    return Err(Error::InvalidParameter(
                        "shift length must equal dim".into(),
                    ));
                }
                let mut values = base.values().to_vec();
                for row in values.chunks_exact_mut(self.dim).skip(self.n_per_cluster) {
                    row.iter_mut().zip(&shift).for_each(|(v, s)| *v += s);
                }
                let labels = (0..n)
                    .map(|i| usize::from(i >= self.n_per_cluster))
                    .collect();
                Ok((
                    DataMatrix::new(values, n, self.dim)?,
                    Partition::new(labels, 2)?,
                ))
            }
            Setting::S2 => {
                let flat = self.shift.as_ref().ok_or_else(|| missing("S2"))?;
                if flat.len() != 12 {
                    return Err(Error::InvalidParameter(
                        "S2 shift must hold 3 centers of 4 values".into(),
                    ));
                }
                let centers: Vec<Vec<f64>> = flat.chunks(4).map(<[f64]>::to_vec).collect();
                gen_s2(
                    self.n_per_cluster,
                    self.skewness,
                    self.kurtosis,
                    &centers,
                    self.seed,
                )
            }
            Setting::S3 => {
                let shift = self.shift.as_ref().ok_or_else(|| missing("S3"))?;
                gen_s3(self.n_per_cluster, self.rate, shift, self.seed)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_stats(data: &DataMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
        let (n, d) = (data.n() as f64, data.dim());
        let mut mean = vec![0.0; d];
        for row in data.rows() {
            for j in 0..d {
                mean[j] += row[j] / n;
            }
        }
        let mut cov = vec![vec![0.0; d]; d];
        for row in data.rows() {
            for a in 0..d {
                for b in 0..d {
                    cov[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]) / n;
                }
            }
        }
        let corr = (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| cov[a][b] / (cov[a][a] * cov[b][b]).sqrt())
                    .collect()
            })
            .collect();
        (mean, corr)
    }

    fn skew_kurt(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    }

    #[test]
    fn mvn_identity_correlation() {
        let d = gen_mvn(2000, 2, 0.0, &[0.0, 0.0], 1).unwrap();
        let (mean, corr) = column_stats(&d);
        assert!(corr[0][1].abs() < 0.1);
        assert!(mean.iter().all(|m| m.abs() < 0.1));
    }

    #[test]
    fn mvn_equicorrelation() {
        let d = gen_mvn(5000, 5, 0.5, &[0.0; 5], 2).unwrap();
        let (_, corr) = column_stats(&d);
        for (a, row) in corr.iter().enumerate() {
            for (b, &r) in row.iter().enumerate() {
                if a != b {
                    assert!((r - 0.5).abs() < 0.05, "{r}");
                }
            }
        }
        assert_eq!(d, gen_mvn(5000, 5, 0.5, &[0.0; 5], 2).unwrap());
    }

    #[test]
    fn mvn_rejects_non_pd() {
        assert!(matches!(
            gen_mvn(10, 3, -0.6, &[0.0; 3], 0),
            Err(Error::NotPositiveDefinite)
        ));
        assert!(gen_mvn(10, 3, 1.0, &[0.0; 3], 0).is_err());
    }

    #[test]
    fn s1_cases() {
        let (a, truth) = gen_s1(S1Case::A, 3).unwrap();
        assert_eq!((a.n(), a.dim()), (250, 5));
        assert!(truth.labels().iter().all(|&l| l == 0));

        let (b, truth) = gen_s1_with(S1Case::B, 20_000, 0.5, 4).unwrap();
        assert_eq!(truth.sizes(), vec![20_000, 20_000]);
        for j in 0..5 {
            let m0: f64 = b.rows().take(20_000).map(|r| r[j]).sum::<f64>() / 20_000.0;
            let m1: f64 = b.rows().skip(20_000).map(|r| r[j]).sum::<f64>() / 20_000.0;
            assert!((m1 - m0 - S1_SHIFT[j]).abs() < 0.05);
        }

        let (bp, _) = gen_s1(S1Case::BPrime, 5).unwrap();
        let (ap, _) = gen_s1(S1Case::APrime, 5).unwrap();
        assert_eq!(bp.dim(), 300);
        // Same seed, so b' is a' plus the tiled shift on the second half.
        for (i, (x, y)) in ap.rows().zip(bp.rows()).enumerate() {
            for j in 0..300 {
                let s = if i >= 125 { S1_SHIFT[j % 5] } else { 0.0 };
                assert!((y[j] - x[j] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fleishman_identity() {
        let c = fleishman_coefficients(0.0, 0.0).unwrap();
        assert!(
            c.a.abs() < 1e-12
                && (c.b - 1.0).abs() < 1e-12
                && c.c.abs() < 1e-12
                && c.d.abs() < 1e-12
        );
    }

    #[test]
    fn fleishman_s2_target() {
        let c = fleishman_coefficients(1.75, 3.75).unwrap();
        assert!(c.residuals(1.75, 3.75).iter().all(|r| r.abs() < 1e-8));
        assert_eq!(c.a, -c.c);
        // Moments recomputed from the raw power sums of Z: E[Z^k] for even k
        // is (k - 1)!!.
        let ez = [
            1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0, 0.0, 945.0, 0.0, 10395.0,
        ];
        let poly = [c.a, c.b, c.c, c.d];
        let power = |k: usize| {
            // Coefficients of Y^k by repeated convolution.
            let mut acc = vec![1.0];
            for _ in 0..k {
                let mut next = vec![0.0; acc.len() + 3];
                for (i, a) in acc.iter().enumerate() {
                    for (j, p) in poly.iter().enumerate() {
                        next[i + j] += a * p;
                    }
                }
                acc = next;
            }
            acc.iter().enumerate().map(|(i, a)| a * ez[i]).sum::<f64>()
        };
        assert!(power(1).abs() < 1e-10);
        assert!((power(2) - 1.0).abs() < 1e-10);
        assert!((power(3) - 1.75).abs() < 1e-8);
        assert!((power(4) - 3.0 - 3.75).abs() < 1e-8);
    }

    #[test]
    fn fleishman_rejects_impossible_pair() {
        // Pearson kurtosis 3.75 with skewness 1.75 violates kurtosis >= skew^2 + 1.
        assert!(matches!(
            fleishman_coefficients(1.75, 0.75),
            Err(Error::InfeasibleMoments { .. })
        ));
    }

    #[test]
    fn fleishman_sample_skewness() {
        let c = fleishman_coefficients(1.75, 3.75).unwrap();
        let mut rng = rng_for(17, &[]);
        let ys: Vec<f64> = (0..1_000_000)
            .map(|_| c.apply(StandardNormal.sample(&mut rng)))
            .collect();
        let (s, _) = skew_kurt(&ys);
        assert!((s - 1.75).abs() < 0.05, "{s}");
    }

    #[test]
    fn vale_maurelli_correlation_and_moments() {
        let d = gen_vale_maurelli(100_000, 4, 0.6, 1.75, 3.75, 8).unwrap();
        let (mean, corr) = column_stats(&d);
        for a in 0..4 {
            assert!(mean[a].abs() < 0.02);
            for (b, &r) in corr[a].iter().enumerate() {
                if a != b {
                    assert!((r - 0.6).abs() < 0.03, "{r}");
                }
            }
        }
        let col: Vec<f64> = d.rows().map(|r| r[0]).collect();
        let (s, _) = skew_kurt(&col);
        assert!((s - 1.75).abs() < 0.1);
        assert_eq!(
            d,
            gen_vale_maurelli(100_000, 4, 0.6, 1.75, 3.75, 8).unwrap()
        );
    }

    #[test]
    fn vale_maurelli_normal_case_is_mvn() {
        let d = gen_vale_maurelli(100_000, 3, 0.4, 0.0, 0.0, 2).unwrap();
        let (_, corr) = column_stats(&d);
        assert!((corr[0][1] - 0.4).abs() < 0.02);
        let col: Vec<f64> = d.rows().map(|r| r[1]).collect();
        let (s, k) = skew_kurt(&col);
        assert!(s.abs() < 0.03 && k.abs() < 0.05);
    }

    #[test]
    fn s2_shape() {
        let centers = vec![
            vec![0.0; 4],
            vec![2.0, 0.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0, 0.0],
        ];
        let (d, truth) = gen_s2(200, 1.75, 3.75, &centers, 1).unwrap();
        assert_eq!(d.n(), 600);
        assert_eq!(truth.k(), 3);
        assert_eq!(truth.sizes(), vec![200; 3]);
    }

    #[test]
    fn s3_exponential() {
        let (d, truth) = gen_s3(100_000, 1.0, &[5.0, 0.0], 3).unwrap();
        let m0: f64 = d.rows().take(100_000).map(|r| r[0]).sum::<f64>() / 1e5;
        let m1: f64 = d.rows().skip(100_000).map(|r| r[0]).sum::<f64>() / 1e5;
        assert!((m0 - 1.0).abs() < 0.02 && (m1 - 6.0).abs() < 0.02);
        assert_eq!(truth.sizes(), vec![100_000, 100_000]);
        let (small, _) = gen_s3(250, 1.0, &[0.0, 0.0], 3).unwrap();
        assert_eq!(small.n(), 500);
    }

    #[test]
    fn generator_spec_roundtrip() {
        let spec = GeneratorSpec::for_setting(Setting::S1b, 4);
        let (d, t) = spec.generate().unwrap();
        assert_eq!((d.n(), d.dim(), t.k()), (250, 5, 2));
        assert_eq!(spec.generate().unwrap().0, d);
        assert!(GeneratorSpec::for_setting(Setting::S3, 1)
            .generate()
            .is_err());
        assert_eq!("s1b'".parse::<Setting>().unwrap(), Setting::S1bPrime);
    }
}
