//! Small statistical helpers for checking simulated counts.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Standard error of a binomial proportion. With no successes this is the
/// one-sided 68.27 % upper limit `1 − 0.3173^{1/n}`; with no trials it is 1.
pub fn binomial_std_err(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let n = trials as f64;
    if successes == 0 {
        return 1.0 - (1.0 - 0.6827f64).powf(1.0 / n);
    }
    let p = successes as f64 / n;
    (p * (1.0 - p) / n).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value and the
/// usual small-sample correction of the scaling factor.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    assert!(!a.is_empty() && !b.is_empty(), "KS test needs two non-empty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    TestResult { statistic: d, p_value: kolmogorov_survival((en + 0.12 + 0.11 / en) * d) }
}

/// Pearson χ² test that the rows of a contingency table share one
/// distribution. Columns that are empty in every row are ignored.
pub fn chi2_homogeneity(rows: &[Vec<u64>]) -> TestResult {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let col_sum: Vec<f64> = (0..width)
        .map(|c| rows.iter().map(|r| r.get(c).copied().unwrap_or(0) as f64).sum())
        .collect();
    let row_sum: Vec<f64> = rows.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let total: f64 = row_sum.iter().sum();
    let live_cols = col_sum.iter().filter(|&&c| c > 0.0).count();
    let live_rows = row_sum.iter().filter(|&&r| r > 0.0).count();
    let mut stat = 0.0;
    for (r, row) in rows.iter().enumerate() {
        for (c, &cs) in col_sum.iter().enumerate() {
            if cs == 0.0 || row_sum[r] == 0.0 {
                continue;
            }
            let expected = row_sum[r] * cs / total;
            let observed = row.get(c).copied().unwrap_or(0) as f64;
            stat += (observed - expected).powi(2) / expected;
        }
    }
    let dof = (live_rows.saturating_sub(1) * live_cols.saturating_sub(1)) as f64;
    let p_value = if dof == 0.0 {
        1.0
    } else {
        ChiSquared::new(dof).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
    };
    TestResult { statistic: stat, p_value }
}
