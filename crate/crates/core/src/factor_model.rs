//! Rolling three-factor regressions and out-of-sample excess returns.
//!
//! For each calendar quarter the model `y = alpha + b1*mkt + b2*smb + b3*hml`
//! is fitted on the trailing estimation window and the residuals of the
//! following quarter are emitted as excess returns.

use chrono::{Months, NaiveDate};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_data::{FactorSeries, ReturnKind, ReturnSeries};
use crate::ols::ols_fit;
use crate::windows::next_quarter_start;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingConfig {
    pub window_years: u32,
    /// Minimum joint stock-factor days in an estimation window.
    pub min_obs: usize,
    /// First quarter to emit. Defaults to the first quarter start at least
    /// `window_years` after the first factor date.
    pub first_quarter: Option<NaiveDate>,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window_years: 4,
            min_obs: 200,
            first_quarter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorFit {
    pub alpha: f64,
    pub betas: [f64; 3],
    /// Estimation window `[start, end)`.
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub n_obs: usize,
}

impl FactorFit {
    pub fn predict(&self, f: &[f64; 3]) -> f64 {
        self.alpha + self.betas[0] * f[0] + self.betas[1] * f[1] + self.betas[2] * f[2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarterSkip {
    pub quarter_start: NaiveDate,
    pub n_obs: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingResult {
    pub excess: ReturnSeries,
    /// One fit per emitted quarter, keyed by quarter start.
    pub fits: Vec<(NaiveDate, FactorFit)>,
    pub skipped: Vec<QuarterSkip>,
}

struct Joint {
    dates: Vec<NaiveDate>,
    y: Vec<f64>,
    f: Vec<[f64; 3]>,
}

fn join(stock: &ReturnSeries, factors: &FactorSeries) -> Joint {
    let mut j = Joint {
        dates: Vec::with_capacity(stock.len()),
        y: Vec::with_capacity(stock.len()),
        f: Vec::with_capacity(stock.len()),
    };
    for (d, y) in stock.dates().iter().zip(stock.values()) {
        if let Some(f) = factors.on(*d) {
            j.dates.push(*d);
            j.y.push(*y);
            j.f.push(f);
        }
    }
    j
}

fn range(dates: &[NaiveDate], start: NaiveDate, end: NaiveDate) -> std::ops::Range<usize> {
    let lo = dates.partition_point(|d| *d < start);
    let hi = dates.partition_point(|d| *d < end);
    lo..hi.max(lo)
}

/// Three-factor fit with intercept on `y` against `f`.
pub fn fit_three_factor(y: &[f64], f: &[[f64; 3]]) -> Result<(f64, [f64; 3])> {
    let x = DMatrix::from_fn(y.len(), 4, |i, j| if j == 0 { 1.0 } else { f[i][j - 1] });
    let fit = ols_fit(y, &x)?;
    let c = &fit.coefficients;
    if !c.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularDesign { column: 0 });
    }
    Ok((c[0], [c[1], c[2], c[3]]))
}

pub fn rolling_excess_returns(
    stock: &ReturnSeries,
    factors: &FactorSeries,
    cfg: &RollingConfig,
) -> Result<RollingResult> {
    if cfg.window_years == 0 {
        return Err(Error::Config("window_years must be positive".into()));
    }
    let window = Months::new(12 * cfg.window_years);
    let mut excess_dates = Vec::new();
    let mut excess_values = Vec::new();
    let mut fits = Vec::new();
    let mut skipped = Vec::new();

    let joint = join(stock, factors);
    let (Some(&first_factor), Some(&last)) = (factors.dates().first(), joint.dates.last()) else {
        let excess = ReturnSeries::new(stock.stock_id(), ReturnKind::Excess, vec![], vec![])?;
        return Ok(RollingResult {
            excess,
            fits,
            skipped,
        });
    };
    let mut q = cfg
        .first_quarter
        .unwrap_or_else(|| next_quarter_start(first_factor + window));

    while q <= last {
        let next = q + Months::new(3);
        let emit = range(&joint.dates, q, next);
        if emit.is_empty() {
            q = next;
            continue;
        }
        let est = range(&joint.dates, q - window, q);
        if est.len() < cfg.min_obs {
            skipped.push(QuarterSkip {
                quarter_start: q,
                n_obs: est.len(),
                reason: format!("{} estimation days < {}", est.len(), cfg.min_obs),
            });
            q = next;
            continue;
        }
        match fit_three_factor(&joint.y[est.clone()], &joint.f[est.clone()]) {
            Ok((alpha, betas)) => {
                let fit = FactorFit {
                    alpha,
                    betas,
                    window_start: q - window,
                    window_end: q,
                    n_obs: est.len(),
                };
                for i in emit {
                    excess_dates.push(joint.dates[i]);
                    excess_values.push(joint.y[i] - fit.predict(&joint.f[i]));
                }
                fits.push((q, fit));
            }
            Err(e) => skipped.push(QuarterSkip {
                quarter_start: q,
                n_obs: est.len(),
                reason: e.to_string(),
            }),
        }
        q = next;
    }

    Ok(RollingResult {
        excess: ReturnSeries::new(
            stock.stock_id(),
            ReturnKind::Excess,
            excess_dates,
            excess_values,
        )?,
        fits,
        skipped,
    })
}

pub const MIN_EXCESS_OBS: usize = 60;

/// Keep a stock iff it has strictly more than `min_obs` excess returns.
pub fn filter_min_obs(series: &ReturnSeries, min_obs: usize) -> bool {
    series.len() > min_obs
}
