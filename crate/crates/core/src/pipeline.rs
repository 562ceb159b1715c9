//! Per-stock stages shared by the CLI and the acceptance suite: returns and
//! excess returns, EGARCH normalization, and the per-stock asymmetry
//! statistics behind the cross-sectional summary table.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::egarch::{egarch_fit_with, normalize, EgarchFit, EgarchParams, FitOptions};
use crate::error::Result;
use crate::factor_model::{filter_min_obs, rolling_excess_returns, RollingConfig, MIN_EXCESS_OBS};
use crate::market_data::{compute_returns, Dataset, ReturnKind, ReturnMethod, ReturnSeries};
use crate::stats::{
    cross_section_summary, return_volatility_correlation, skewness, CrossSectionSummary,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub return_method: ReturnMethod,
    pub rolling: RollingConfig,
    /// Stocks need strictly more excess returns than this.
    pub min_excess_obs: usize,
    /// Study period, both ends inclusive.
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            return_method: ReturnMethod::Log,
            rolling: RollingConfig::default(),
            min_excess_obs: MIN_EXCESS_OBS,
            period_start: NaiveDate::from_ymd_opt(2006, 1, 1).unwrap(),
            period_end: NaiveDate::from_ymd_opt(2014, 3, 31).unwrap(),
        }
    }
}

impl AnalysisConfig {
    /// Exclusive end of the study period.
    pub fn period_stop(&self) -> NaiveDate {
        self.period_end.succ_opt().unwrap_or(self.period_end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StockDrop {
    pub stock_id: String,
    pub stage: &'static str,
    pub reason: String,
}

/// Raw and excess returns of one retained stock over the study period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StockReturns {
    pub stock_id: String,
    pub raw: ReturnSeries,
    pub excess: ReturnSeries,
    pub gaps: usize,
    pub skipped_quarters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcessStage {
    pub stocks: Vec<StockReturns>,
    pub dropped: Vec<StockDrop>,
}

/// Raw returns, rolling excess returns and the minimum-history filter for
/// every stock in the dataset.
pub fn excess_stage(dataset: &Dataset, cfg: &AnalysisConfig) -> ExcessStage {
    let stop = cfg.period_stop();
    let results: Vec<std::result::Result<StockReturns, StockDrop>> = dataset
        .prices
        .par_iter()
        .map(|(id, prices)| {
            let drop = |reason: String| StockDrop {
                stock_id: id.clone(),
                stage: "excess",
                reason,
            };
            let raw =
                compute_returns(prices, cfg.return_method).map_err(|e| drop(e.to_string()))?;
            let rolled = rolling_excess_returns(&raw, &dataset.factors, &cfg.rolling)
                .map_err(|e| drop(e.to_string()))?;
            let excess = rolled.excess.slice_between(cfg.period_start, stop);
            if !filter_min_obs(&excess, cfg.min_excess_obs) {
                return Err(drop(format!(
                    "{} excess returns, need more than {}",
                    excess.len(),
                    cfg.min_excess_obs
                )));
            }
            Ok(StockReturns {
                stock_id: id.clone(),
                raw: raw.slice_between(cfg.period_start, stop),
                excess,
                gaps: prices.gap_count(&dataset.calendar),
                skipped_quarters: rolled.skipped.len(),
            })
        })
        .collect();
    let mut stage = ExcessStage {
        stocks: Vec::new(),
        dropped: Vec::new(),
    };
    for r in results {
        match r {
            Ok(s) => stage.stocks.push(s),
            Err(d) => stage.dropped.push(d),
        }
    }
    stage
}

/// Full-sample EGARCH fit and normalized excess returns for one stock.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StockVolatility {
    pub stock_id: String,
    pub params: EgarchParams,
    pub loglik: f64,
    pub converged: bool,
    pub normalized: ReturnSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EgarchStage {
    /// Converged fits only.
    pub stocks: Vec<StockVolatility>,
    /// Fits that failed or did not converge.
    pub dropped: Vec<StockDrop>,
}

pub fn fit_and_normalize(
    excess: &ReturnSeries,
    opts: &FitOptions,
) -> Result<(EgarchFit, ReturnSeries)> {
    let fit = egarch_fit_with(excess.values(), opts)?;
    let z = normalize(excess.values(), &fit.path)?;
    let normalized = ReturnSeries::new(
        excess.stock_id(),
        ReturnKind::Normalized,
        excess.dates().to_vec(),
        z.values,
    )?;
    Ok((fit, normalized))
}

pub fn egarch_stage(stocks: &[StockReturns], opts: &FitOptions) -> EgarchStage {
    let results: Vec<std::result::Result<StockVolatility, StockDrop>> = stocks
        .par_iter()
        .map(|s| {
            let drop = |reason: String| StockDrop {
                stock_id: s.stock_id.clone(),
                stage: "egarch",
                reason,
            };
            let (fit, normalized) =
                fit_and_normalize(&s.excess, opts).map_err(|e| drop(e.to_string()))?;
            if !fit.converged {
                return Err(drop(format!(
                    "optimizer did not converge after {} evaluations",
                    fit.evals
                )));
            }
            Ok(StockVolatility {
                stock_id: s.stock_id.clone(),
                params: fit.params,
                loglik: fit.path.loglik,
                converged: fit.converged,
                normalized,
            })
        })
        .collect();
    let mut stage = EgarchStage {
        stocks: Vec::new(),
        dropped: Vec::new(),
    };
    for r in results {
        match r {
            Ok(s) => stage.stocks.push(s),
            Err(d) => stage.dropped.push(d),
        }
    }
    stage
}

/// The six per-stock statistics of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StockStatistics {
    pub stock_id: String,
    pub skew_raw: f64,
    pub skew_excess: f64,
    pub skew_normalized: f64,
    pub leverage_xi1: f64,
    pub corr_raw: f64,
    pub corr_excess: f64,
}

impl StockStatistics {
    pub fn values(&self) -> [f64; 6] {
        [
            self.skew_raw,
            self.skew_excess,
            self.skew_normalized,
            self.leverage_xi1,
            self.corr_raw,
            self.corr_excess,
        ]
    }
}

/// Column names of the summary table, in order.
pub const STATISTIC_NAMES: [&str; 6] = [
    "skewness_raw",
    "skewness_excess",
    "skewness_normalized",
    "leverage_coefficient",
    "correlation_raw",
    "correlation_excess",
];

pub fn stock_statistics(returns: &StockReturns, vol: &StockVolatility) -> Result<StockStatistics> {
    Ok(StockStatistics {
        stock_id: returns.stock_id.clone(),
        skew_raw: skewness(returns.raw.values())?,
        skew_excess: skewness(returns.excess.values())?,
        skew_normalized: skewness(vol.normalized.values())?,
        leverage_xi1: vol.params.xi1,
        corr_raw: return_volatility_correlation(returns.raw.values())?,
        corr_excess: return_volatility_correlation(returns.excess.values())?,
    })
}

/// Per-stock statistics for every stock present in both stages.
pub fn all_stock_statistics(
    returns: &[StockReturns],
    vols: &[StockVolatility],
) -> (Vec<StockStatistics>, Vec<StockDrop>) {
    let mut out = Vec::new();
    let mut dropped = Vec::new();
    for v in vols {
        let Ok(i) = returns.binary_search_by(|r| r.stock_id.as_str().cmp(&v.stock_id)) else {
            continue;
        };
        match stock_statistics(&returns[i], v) {
            Ok(s) => out.push(s),
            Err(e) => dropped.push(StockDrop {
                stock_id: v.stock_id.clone(),
                stage: "stats",
                reason: e.to_string(),
            }),
        }
    }
    (out, dropped)
}

/// One cross-sectional summary per statistic column.
pub fn summary_table(stats: &[StockStatistics]) -> Result<Vec<CrossSectionSummary>> {
    (0..STATISTIC_NAMES.len())
        .map(|c| {
            let col: Vec<f64> = stats.iter().map(|s| s.values()[c]).collect();
            cross_section_summary(STATISTIC_NAMES[c], &col)
        })
        .collect()
}

/// Fixed-width rendering of the summary table: mean and median rows with
/// significance stars from the t-test and signed-rank test respectively.
pub fn format_summary_table(rows: &[CrossSectionSummary]) -> String {
    let headers = [
        "skew raw",
        "skew excess",
        "skew norm.",
        "leverage",
        "corr raw",
        "corr excess",
    ];
    let mut out = String::new();
    out.push_str(&format!("{:<10}", ""));
    for h in headers.iter().take(rows.len()) {
        out.push_str(&format!("{h:>16}"));
    }
    out.push('\n');
    out.push_str(&format!("{:<10}", "mean"));
    for r in rows {
        out.push_str(&format!("{:>16}", format!("{:.4}{}", r.mean, r.t_stars)));
    }
    out.push('\n');
    out.push_str(&format!("{:<10}", "median"));
    for r in rows {
        out.push_str(&format!(
            "{:>16}",
            format!("{:.4}{}", r.median, r.signed_rank_stars)
        ));
    }
    out.push('\n');
    out.push_str(&format!("{:<10}", "stocks"));
    for r in rows {
        out.push_str(&format!("{:>16}", r.n_stocks));
    }
    out.push('\n');
    out.push_str("*** p<0.01, ** p<0.05, * p<0.1 (t-test for mean, signed-rank test for median)\n");
    out
}
