//! Reference computations written independently of the library.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gamma(df / 2) for a positive integer `df`.
pub fn half_gamma(df: usize) -> f64 {
    if df % 2 == 0 {
        (1..df / 2).map(|i| i as f64).product()
    } else {
        // Gamma(1/2) = sqrt(pi), Gamma(x + 1) = x Gamma(x).
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < df as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

pub fn chi_square_pdf(t: f64, df: usize) -> f64 {
    let k = df as f64 / 2.0;
    t.powf(k - 1.0) * (-t / 2.0).exp() / (2f64.powf(k) * half_gamma(df))
}

/// Upper tail of the chi-square distribution by composite Simpson
/// integration of the density over `[x, x + 400]`.
pub fn chi_square_sf_numeric(x: f64, df: usize) -> f64 {
    assert!(x > 0.0);
    let steps = 400_000;
    let h = 400.0 / steps as f64;
    let mut acc = chi_square_pdf(x, df) + chi_square_pdf(x + 400.0, df);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * chi_square_pdf(x + i as f64 * h, df);
    }
    acc * h / 3.0
}

/// Pearson statistic computed straight from the cell formula.
pub fn pearson_by_hand(table: &[Vec<u64>; 2]) -> f64 {
    let cols = table[0].len();
    let n: u64 = table.iter().flatten().sum();
    let mut stat = 0.0;
    for row in table {
        let rt: u64 = row.iter().sum();
        for c in 0..cols {
            let ct = table[0][c] + table[1][c];
            if ct == 0 {
                continue;
            }
            let e = rt as f64 * ct as f64 / n as f64;
            stat += (row[c] as f64 - e).powi(2) / e;
        }
    }
    stat
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let s: f64 = (1..=50)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-(j * j) * PI * PI / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        1.0 - (2.0 * PI).sqrt() / lambda * s
    } else {
        2.0 * (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum::<f64>()
    }
}

/// One-sample Kolmogorov–Smirnov test against Uniform(0, 1). Returns
/// (D, approximate p-value) using the Stephens small-sample correction.
pub fn ks_uniform(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let root = n.sqrt();
    (d, kolmogorov_sf(d * (root + 0.12 + 0.11 / root)))
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Exact conditional p-value of the Pearson statistic for a 2 x 2 table
/// with both margins fixed: the hypergeometric mass of every table whose
/// statistic reaches the observed one (with the usual relative tie slack).
pub fn exact_2x2_pvalue(a: [u64; 2], b: [u64; 2]) -> f64 {
    let row_a = a[0] + a[1];
    let col0 = a[0] + b[0];
    let n = row_a + b[0] + b[1];
    let observed = pearson_by_hand(&[a.to_vec(), b.to_vec()]);
    let ln_denominator = ln_factorial(n) - ln_factorial(row_a) - ln_factorial(n - row_a);
    let lo = col0.saturating_sub(n - row_a);
    let hi = col0.min(row_a);
    (lo..=hi)
        .filter(|&x| {
            let t = [vec![x, row_a - x], vec![col0 - x, n + x - row_a - col0]];
            pearson_by_hand(&t) >= observed * (1.0 - 64.0 * f64::EPSILON)
        })
        .map(|x| {
            let ln_pmf = ln_factorial(col0) - ln_factorial(x) - ln_factorial(col0 - x)
                + ln_factorial(n - col0)
                - ln_factorial(row_a - x)
                - ln_factorial(n + x - col0 - row_a)
                - ln_denominator;
            ln_pmf.exp()
        })
        .sum()
}
