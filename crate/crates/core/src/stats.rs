//! Goodness-of-fit statistics used by the sampling checks and the simulator.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One-sample Kolmogorov-Smirnov distance between the empirical law of
/// `samples` and `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        let lo = f - i as f64 / n;
        let hi = (i + 1) as f64 / n - f;
        d.max(lo).max(hi)
    })
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.total_cmp(q));
    xb.sort_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_survival(lambda))
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Survival function of the chi-square distribution.
pub fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `observed` counts against cell probabilities.
/// Cells with zero expected probability are dropped.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareResult {
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n as f64;
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    let dof = cells.saturating_sub(1);
    ChiSquareResult { statistic: stat, dof, p_value: chi_square_sf(stat, dof) }
}

/// Chi-square test of homogeneity for a `rows × cols` contingency table.
/// All-zero columns are dropped; the Yates continuity correction is applied
/// to 2×2 tables.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> ChiSquareResult {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    let col_tot: Vec<u64> = (0..cols).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    let keep: Vec<usize> = (0..cols).filter(|&c| col_tot[c] > 0).collect();
    let row_tot: Vec<u64> = table.iter().map(|r| keep.iter().map(|&c| r[c]).sum()).collect();
    let total: u64 = row_tot.iter().sum();
    if total == 0 || keep.len() < 2 || rows < 2 {
        return ChiSquareResult { statistic: 0.0, dof: 0, p_value: 1.0 };
    }
    let yates = rows == 2 && keep.len() == 2;
    let mut stat = 0.0;
    for (r, row) in table.iter().enumerate() {
        for &c in &keep {
            let e = row_tot[r] as f64 * col_tot[c] as f64 / total as f64;
            if e > 0.0 {
                let mut diff = (row[c] as f64 - e).abs();
                if yates {
                    diff = (diff - 0.5).max(0.0);
                }
                stat += diff * diff / e;
            }
        }
    }
    let dof = (rows - 1) * (keep.len() - 1);
    ChiSquareResult { statistic: stat, dof, p_value: chi_square_sf(stat, dof) }
}

/// CDF of the arcsine law with density `1/(π√(x(1−x)))` on `[0, 1]`.
pub fn arcsine_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        std::f64::consts::FRAC_2_PI * x.sqrt().asin()
    }
}
