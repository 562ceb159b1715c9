//! Asymmetry statistics and the cross-sectional tests used to summarize them.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Median of a non-empty slice (average of the two middle values for even n).
pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample variance with the n - 1 divisor.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn sample_std(x: &[f64]) -> f64 {
    sample_variance(x).sqrt()
}

fn is_degenerate_spread(m2: f64, x: &[f64]) -> bool {
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    m2 <= (1e-14 * scale).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SkewnessEstimator {
    /// m3 / m2^(3/2) with 1/n central moments.
    #[default]
    Population,
    /// Adjusted Fisher-Pearson estimator, sqrt(n(n-1))/(n-2) times the
    /// population value.
    BiasCorrected,
}

pub fn skewness(x: &[f64]) -> Result<f64> {
    skewness_with(x, SkewnessEstimator::Population)
}

pub fn skewness_with(x: &[f64], estimator: SkewnessEstimator) -> Result<f64> {
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let m = mean(x);
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in x {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n as f64;
    m3 /= n as f64;
    if is_degenerate_spread(m2, x) {
        return Err(Error::UndefinedStatistic(
            "skewness of a constant series".into(),
        ));
    }
    let g1 = m3 / m2.powf(1.5);
    Ok(match estimator {
        SkewnessEstimator::Population => g1,
        SkewnessEstimator::BiasCorrected => {
            let nf = n as f64;
            g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0)
        }
    })
}

/// Two-pass Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} vs {} observations",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let n = x.len() as f64;
    if is_degenerate_spread(sxx / n, x) || is_degenerate_spread(syy / n, y) {
        return Err(Error::UndefinedStatistic(
            "correlation with a constant series".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation between returns and their absolute values, the contemporaneous
/// volatility proxy.
pub fn return_volatility_correlation(r: &[f64]) -> Result<f64> {
    let abs: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    pearson(r, &abs)
}

pub fn t_two_sided_p(t: f64, dof: f64) -> f64 {
    if !t.is_finite() || dof <= 0.0 {
        return f64::NAN;
    }
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive dof");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

pub fn normal_two_sided_p(z: f64) -> f64 {
    let dist = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * dist.cdf(-z.abs())).clamp(0.0, 1.0)
}

/// `***` below 1%, `**` below 5%, `*` below 10%.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub dof: usize,
    pub stars: &'static str,
}

pub fn one_sample_t_test(x: &[f64], null_mean: f64) -> Result<TTest> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    if is_degenerate_spread(var, x) {
        return Err(Error::DegenerateSample("zero standard deviation".into()));
    }
    let t = (m - null_mean) / (var / n as f64).sqrt();
    let p = t_two_sided_p(t, (n - 1) as f64);
    Ok(TTest {
        t,
        p,
        dof: n - 1,
        stars: significance_stars(p),
    })
}

/// Mid-ranks (1-based) of `v`, ties sharing their average rank.
pub fn midranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn nonzero_deviations(x: &[f64], null_median: f64) -> Vec<f64> {
    x.iter()
        .map(|v| v - null_median)
        .filter(|d| *d != 0.0)
        .collect()
}

/// Sum of the ranks of |x - null| over positive deviations; zeros dropped.
pub fn signed_rank_statistic(x: &[f64], null_median: f64) -> f64 {
    let d = nonzero_deviations(x, null_median);
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    midranks(&abs)
        .iter()
        .zip(&d)
        .filter(|(_, v)| **v > 0.0)
        .map(|(r, _)| r)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedRankTest {
    pub w: f64,
    pub z: f64,
    pub p: f64,
    pub n_nonzero: usize,
    pub stars: &'static str,
}

pub const MIN_SIGNED_RANK_OBS: usize = 5;

/// Wilcoxon signed-rank test, normal approximation with tie-corrected
/// variance.
pub fn wilcoxon_signed_rank(x: &[f64], null_median: f64) -> Result<SignedRankTest> {
    let d = nonzero_deviations(x, null_median);
    let n = d.len();
    if n < MIN_SIGNED_RANK_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_SIGNED_RANK_OBS,
            got: n,
        });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = midranks(&abs);
    let w: f64 = ranks
        .iter()
        .zip(&d)
        .filter(|(_, v)| **v > 0.0)
        .map(|(r, _)| r)
        .sum();

    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nf = n as f64;
    let expected = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let z = (w - expected) / var.sqrt();
    let p = normal_two_sided_p(z);
    Ok(SignedRankTest {
        w,
        z,
        p,
        n_nonzero: n,
        stars: significance_stars(p),
    })
}

/// Figure data for a pooled return sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionData {
    /// (bin center, density)
    pub density: Vec<(f64, f64)>,
    /// (x, F(x)) at each distinct sample value.
    pub ecdf: Vec<(f64, f64)>,
    /// (x, F(x), 1 - F(-x)) on the non-positive axis.
    pub tails: Vec<(f64, f64, f64)>,
}

pub const MIN_DISTRIBUTION_OBS: usize = 10;

pub fn distribution_data(x: &[f64], n_bins: usize) -> Result<DistributionData> {
    let n = x.len();
    if n < MIN_DISTRIBUTION_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_DISTRIBUTION_OBS,
            got: n,
        });
    }
    if n_bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let width = if hi > lo {
        (hi - lo) / n_bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0usize; n_bins];
    for v in &sorted {
        let b = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let density = counts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            (
                lo + (i as f64 + 0.5) * width,
                *c as f64 / (n as f64 * width),
            )
        })
        .collect();

    let mut ecdf: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n as f64;
        match ecdf.last_mut() {
            Some(last) if last.0 == *v => last.1 = f,
            _ => ecdf.push((*v, f)),
        }
    }

    let cdf = |t: f64| sorted.partition_point(|v| *v <= t) as f64 / n as f64;
    let mut magnitudes: Vec<f64> = sorted.iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    magnitudes.dedup();
    let tails = magnitudes
        .into_iter()
        .map(|m| (-m, cdf(-m), 1.0 - cdf(m)))
        .collect();

    Ok(DistributionData {
        density,
        ecdf,
        tails,
    })
}

/// One row of the cross-sectional summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSectionSummary {
    pub statistic: String,
    pub mean: f64,
    pub median: f64,
    pub t_statistic: f64,
    pub t_pvalue: f64,
    pub t_stars: &'static str,
    /// Absent with fewer than five nonzero values.
    pub signed_rank_statistic: Option<f64>,
    pub signed_rank_pvalue: Option<f64>,
    pub signed_rank_stars: &'static str,
    pub n_stocks: usize,
}

pub fn cross_section_summary(statistic: &str, values: &[f64]) -> Result<CrossSectionSummary> {
    let t = one_sample_t_test(values, 0.0)?;
    let sr = match wilcoxon_signed_rank(values, 0.0) {
        Ok(sr) => Some(sr),
        Err(Error::InsufficientData { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CrossSectionSummary {
        statistic: statistic.to_string(),
        mean: mean(values),
        median: median(values),
        t_statistic: t.t,
        t_pvalue: t.p,
        t_stars: t.stars,
        signed_rank_statistic: sr.as_ref().map(|s| s.w),
        signed_rank_pvalue: sr.as_ref().map(|s| s.p),
        signed_rank_stars: sr.as_ref().map_or("", |s| s.stars),
        n_stocks: values.len(),
    })
}
