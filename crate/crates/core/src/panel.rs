//! Stock-by-window panel samples and regressions with industry and time
//! fixed effects.
//!
//! The fixed effects are absorbed by projecting the dependent variable and
//! the regressors off the span of the intercept and the industry and time
//! dummies (one reference level dropped per set). By Frisch-Waugh-Lovell the
//! slopes, their classical standard errors, R² and F equal those of OLS on the
//! fully dummy-expanded design.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::egarch::{egarch_fit_with, EgarchParams, FitOptions};
use crate::error::{Error, Result};
use crate::events::{assign_groups, shortable_dummy, Group, ListTimeline};
use crate::market_data::{ReturnSeries, StockId, TradingCalendar, TurnoverSeries};
use crate::ols::RANK_TOLERANCE;
use crate::stats::{
    return_volatility_correlation, sample_std, significance_stars, skewness, t_two_sided_p,
};
use crate::windows::{calendar_windows, Window, Windowing};

/// Minimum daily observations per window; samples need strictly more.
pub const MIN_PANEL_OBS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dependent {
    SkewRaw,
    SkewExcess,
    SkewNormalized,
    Leverage,
    CorrRaw,
    CorrExcess,
}

impl Dependent {
    pub const ALL: [Dependent; 6] = [
        Dependent::SkewRaw,
        Dependent::SkewExcess,
        Dependent::SkewNormalized,
        Dependent::Leverage,
        Dependent::CorrRaw,
        Dependent::CorrExcess,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dependent::SkewRaw => "skew_raw",
            Dependent::SkewExcess => "skew_excess",
            Dependent::SkewNormalized => "skew_normalized",
            Dependent::Leverage => "leverage_xi1",
            Dependent::CorrRaw => "corr_raw",
            Dependent::CorrExcess => "corr_excess",
        }
    }

    fn header(self) -> (&'static str, &'static str) {
        match self {
            Dependent::SkewRaw => ("skewness", "raw"),
            Dependent::SkewExcess => ("skewness", "excess"),
            Dependent::SkewNormalized => ("skewness", "normalized"),
            Dependent::Leverage => ("leverage", "coefficient"),
            Dependent::CorrRaw => ("ret-vol corr", "raw"),
            Dependent::CorrExcess => ("ret-vol corr", "excess"),
        }
    }
}

impl FromStr for Dependent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Dependent::ALL
            .into_iter()
            .find(|d| d.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown dependent variable `{s}`")))
    }
}

impl fmt::Display for Dependent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Regressor names in design order.
pub const REGRESSORS: [&str; 5] = [
    "turnover",
    "return",
    "volatility",
    "designated_list",
    "short_sale",
];

/// Row labels used in the printed table, in design order.
pub const REGRESSOR_LABELS: [&str; 5] = [
    "turnover rate",
    "return",
    "volatility",
    "designated list",
    "short sale practiced",
];

/// One stock in one window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelSample {
    pub stock_id: StockId,
    pub window: usize,
    pub industry_code: String,
    pub n_obs: usize,
    pub skew_raw: f64,
    pub skew_excess: f64,
    pub skew_normalized: f64,
    pub leverage_xi1: f64,
    pub corr_raw: f64,
    pub corr_excess: f64,
    /// Average daily turnover.
    pub turnover: f64,
    /// Cumulative log return.
    pub ret: f64,
    /// Standard deviation of daily returns.
    pub sigma: f64,
    /// Designated-list group dummy.
    pub v: u8,
    /// Shortable on more than half the window's trading days.
    pub u: u8,
}

impl PanelSample {
    pub fn dependent(&self, d: Dependent) -> f64 {
        match d {
            Dependent::SkewRaw => self.skew_raw,
            Dependent::SkewExcess => self.skew_excess,
            Dependent::SkewNormalized => self.skew_normalized,
            Dependent::Leverage => self.leverage_xi1,
            Dependent::CorrRaw => self.corr_raw,
            Dependent::CorrExcess => self.corr_excess,
        }
    }

    pub fn regressors(&self) -> [f64; 5] {
        [
            self.turnover,
            self.ret,
            self.sigma,
            f64::from(self.v),
            f64::from(self.u),
        ]
    }
}

/// Everything the sample builder needs about one stock.
#[derive(Debug, Clone)]
pub struct StockPanelInput<'a> {
    pub stock_id: &'a str,
    pub industry_code: &'a str,
    pub raw: &'a ReturnSeries,
    pub excess: &'a ReturnSeries,
    /// Excess returns normalized by the stock's full-sample EGARCH fit.
    pub normalized: &'a ReturnSeries,
    /// Full-sample EGARCH parameters; starting point for window fits.
    pub full_fit: EgarchParams,
    pub turnover: Option<&'a TurnoverSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelConfig {
    pub windowing: Windowing,
    pub min_obs: usize,
    pub period_start: NaiveDate,
    /// Inclusive.
    pub period_end: NaiveDate,
    /// Group membership date.
    pub as_of: NaiveDate,
    /// Optimizer budget for each within-window EGARCH fit.
    pub window_max_evals: usize,
}

impl Default for PanelConfig {
    fn default() -> Self {
        Self {
            windowing: Windowing::Quarter,
            min_obs: MIN_PANEL_OBS,
            period_start: NaiveDate::from_ymd_opt(2006, 1, 1).unwrap(),
            period_end: NaiveDate::from_ymd_opt(2014, 3, 31).unwrap(),
            as_of: NaiveDate::from_ymd_opt(2014, 3, 31).unwrap(),
            window_max_evals: FitOptions::default().max_evals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    NoTurnover,
    UndefinedStatistic,
    EgarchFailed,
    EgarchNotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub stock_id: StockId,
    pub window: usize,
    pub reason: ExclusionReason,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelBuild {
    pub windows: Vec<Window>,
    pub samples: Vec<PanelSample>,
    /// Stock-windows with more than `min_obs` days that were still dropped.
    pub excluded: Vec<Exclusion>,
    /// Indices of windows with no qualifying stock.
    pub empty_windows: Vec<usize>,
}

impl PanelBuild {
    pub fn exclusion_counts(&self) -> BTreeMap<ExclusionReason, usize> {
        let mut m = BTreeMap::new();
        for e in &self.excluded {
            *m.entry(e.reason).or_insert(0) += 1;
        }
        m
    }
}

fn sample_for(
    input: &StockPanelInput<'_>,
    w: &Window,
    cfg: &PanelConfig,
    v: u8,
    timeline: &ListTimeline,
    calendar: &TradingCalendar,
) -> std::result::Result<Option<PanelSample>, Exclusion> {
    let excess = input.excess.values_between(w.start, w.end);
    if excess.len() <= cfg.min_obs {
        return Ok(None);
    }
    let exclude = |reason, detail: String| Exclusion {
        stock_id: input.stock_id.to_string(),
        window: w.index,
        reason,
        detail,
    };
    let raw = input.raw.values_between(w.start, w.end);
    let normalized = input.normalized.values_between(w.start, w.end);
    let turnover = input
        .turnover
        .and_then(|t| t.mean_between(w.start, w.end))
        .ok_or_else(|| {
            exclude(
                ExclusionReason::NoTurnover,
                "no turnover observations".into(),
            )
        })?;

    let stat =
        |r: Result<f64>| r.map_err(|e| exclude(ExclusionReason::UndefinedStatistic, e.to_string()));
    let skew_raw = stat(skewness(raw))?;
    let skew_excess = stat(skewness(excess))?;
    let skew_normalized = stat(skewness(normalized))?;
    let corr_raw = stat(return_volatility_correlation(raw))?;
    let corr_excess = stat(return_volatility_correlation(excess))?;

    let opts = FitOptions {
        start: Some(input.full_fit),
        min_len: cfg.min_obs + 1,
        max_evals: cfg.window_max_evals,
        ..FitOptions::default()
    };
    let fit = egarch_fit_with(excess, &opts)
        .map_err(|e| exclude(ExclusionReason::EgarchFailed, e.to_string()))?;
    if !fit.converged {
        return Err(exclude(
            ExclusionReason::EgarchNotConverged,
            format!("{} evaluations", fit.evals),
        ));
    }

    let u = shortable_dummy(input.stock_id, w.start, w.end, timeline, calendar).min(v);
    Ok(Some(PanelSample {
        stock_id: input.stock_id.to_string(),
        window: w.index,
        industry_code: input.industry_code.to_string(),
        n_obs: excess.len(),
        skew_raw,
        skew_excess,
        skew_normalized,
        leverage_xi1: fit.params.xi1,
        corr_raw,
        corr_excess,
        turnover,
        ret: raw.iter().sum(),
        sigma: if raw.len() > 1 { sample_std(raw) } else { 0.0 },
        v,
        u,
    }))
}

/// Builds one sample per (stock, window) with more than `min_obs` daily
/// excess returns. Stocks are processed in parallel; output order is by
/// stock, then window.
pub fn build_samples(
    inputs: &[StockPanelInput<'_>],
    timeline: &ListTimeline,
    calendar: &TradingCalendar,
    cfg: &PanelConfig,
) -> PanelBuild {
    let windows = calendar_windows(cfg.period_start, cfg.period_end, cfg.windowing);
    let ids: Vec<StockId> = inputs.iter().map(|i| i.stock_id.to_string()).collect();
    let groups = assign_groups(timeline, &ids, cfg.as_of);

    let per_stock: Vec<(Vec<PanelSample>, Vec<Exclusion>)> = inputs
        .par_iter()
        .map(|input| {
            let v = u8::from(groups[input.stock_id] == Group::Group1);
            let mut samples = Vec::new();
            let mut excluded = Vec::new();
            for w in &windows {
                match sample_for(input, w, cfg, v, timeline, calendar) {
                    Ok(Some(s)) => samples.push(s),
                    Ok(None) => {}
                    Err(e) => excluded.push(e),
                }
            }
            (samples, excluded)
        })
        .collect();

    let mut samples = Vec::new();
    let mut excluded = Vec::new();
    for (s, e) in per_stock {
        samples.extend(s);
        excluded.extend(e);
    }
    let used: BTreeSet<usize> = samples.iter().map(|s| s.window).collect();
    let empty_windows = windows
        .iter()
        .map(|w| w.index)
        .filter(|i| !used.contains(i))
        .collect();
    PanelBuild {
        windows,
        samples,
        excluded,
        empty_windows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StdErrorKind {
    /// Homoskedastic OLS standard errors.
    #[default]
    Classical,
    /// Sandwich estimator clustered on the supplied groups, with the
    /// G/(G-1) * (n-1)/(n-K) small-sample factor.
    Clustered,
}

/// Slope estimates after absorbing industry and time fixed effects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: f64,
    pub rss: f64,
    pub n_obs: usize,
    /// Intercept + dummies + slopes.
    pub n_params: usize,
    pub industry_levels: usize,
    pub time_levels: usize,
}

fn level_index(labels: &[usize]) -> (Vec<usize>, usize) {
    let levels: BTreeSet<usize> = labels.iter().copied().collect();
    let pos: BTreeMap<usize, usize> = levels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    (labels.iter().map(|l| pos[l]).collect(), levels.len())
}

/// Regression of `y` on `columns` with an intercept plus industry and time
/// dummies (first level of each set is the reference). `industry` and `time`
/// are arbitrary integer labels per observation.
pub fn fe_ols_columns(
    y: &[f64],
    columns: &[Vec<f64>],
    names: &[&str],
    industry: &[usize],
    time: &[usize],
    se: StdErrorKind,
    clusters: Option<&[usize]>,
) -> Result<FeFit> {
    let n = y.len();
    let p = columns.len();
    if columns.iter().any(|c| c.len() != n) || industry.len() != n || time.len() != n {
        return Err(Error::Shape(
            "regressor, label and dependent lengths differ".into(),
        ));
    }
    if names.len() != p {
        return Err(Error::Shape(format!(
            "{} names for {p} regressors",
            names.len()
        )));
    }
    let (ind, n_ind) = level_index(industry);
    let (tim, n_time) = level_index(time);
    let g = 1 + n_ind.saturating_sub(1) + n_time.saturating_sub(1);
    let k = g + p;
    if n <= k {
        return Err(Error::Underdetermined { rows: n, cols: k });
    }

    let dummies = DMatrix::from_fn(n, g, |i, j| {
        if j == 0 {
            1.0
        } else if j < n_ind {
            f64::from(ind[i] == j)
        } else {
            f64::from(tim[i] == j - n_ind + 1)
        }
    });
    let dqr = dummies.qr();
    crate::ols::check_rank(&dqr.r()).map_err(|_| Error::Collinear {
        column: "fixed effects".into(),
    })?;
    let q = dqr.q();
    let annihilate = |v: DVector<f64>| {
        let proj = &q * (q.transpose() * &v);
        v - proj
    };

    let y_tilde = annihilate(DVector::from_column_slice(y));
    let mut x_tilde = DMatrix::zeros(n, p);
    for (j, c) in columns.iter().enumerate() {
        let cv = DVector::from_column_slice(c);
        let norm = cv.norm();
        let r = annihilate(cv);
        if norm == 0.0 || r.norm() <= RANK_TOLERANCE.sqrt() * norm {
            return Err(Error::Collinear {
                column: names[j].to_string(),
            });
        }
        x_tilde.set_column(j, &r);
    }

    let xqr = x_tilde.clone().qr();
    let r = xqr.r();
    for j in 0..p {
        if r[(j, j)].abs() <= RANK_TOLERANCE.sqrt() * x_tilde.column(j).norm() {
            return Err(Error::Collinear {
                column: names[j].to_string(),
            });
        }
    }
    let qty = xqr.q().transpose() * &y_tilde;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Collinear {
            column: names[p - 1].to_string(),
        })?;
    let resid = &y_tilde - &x_tilde * &beta;
    let rss = resid.norm_squared();
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let dof = (n - k) as f64;
    let sigma2 = rss / dof;

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Collinear {
            column: names[p - 1].to_string(),
        })?;
    let bread = &r_inv * r_inv.transpose();
    let cov = match se {
        StdErrorKind::Classical => &bread * sigma2,
        StdErrorKind::Clustered => {
            let cl = clusters
                .ok_or_else(|| Error::Config("clustered errors need cluster labels".into()))?;
            if cl.len() != n {
                return Err(Error::Shape("cluster labels length differs".into()));
            }
            let mut scores: BTreeMap<usize, DVector<f64>> = BTreeMap::new();
            for i in 0..n {
                let s = scores.entry(cl[i]).or_insert_with(|| DVector::zeros(p));
                *s += x_tilde.row(i).transpose() * resid[i];
            }
            let n_cl = scores.len() as f64;
            let mut meat = DMatrix::zeros(p, p);
            for s in scores.values() {
                meat += s * s.transpose();
            }
            let scale = n_cl / (n_cl - 1.0) * (n as f64 - 1.0) / dof;
            &bread * meat * &bread * scale
        }
    };

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = (0..p).map(|j| cov[(j, j)].sqrt()).collect();
    let t_stats: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(b, s)| b / s)
        .collect();
    let p_values = t_stats.iter().map(|t| t_two_sided_p(*t, dof)).collect();
    let r_squared = 1.0 - rss / tss;
    Ok(FeFit {
        coefficients,
        std_errors,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared: 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / dof,
        f_stat: ((tss - rss) / (k - 1) as f64) / sigma2,
        rss,
        n_obs: n,
        n_params: k,
        industry_levels: n_ind,
        time_levels: n_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: &'static str,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelFit {
    pub dependent: Dependent,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: f64,
    pub n_obs: usize,
    pub n_stocks: usize,
    pub industry_levels: usize,
    pub time_levels: usize,
    pub industry_fe: bool,
    pub time_fe: bool,
    pub std_errors: StdErrorKind,
}

impl PanelFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

fn labels<T: Ord + Clone>(values: impl Iterator<Item = T>) -> Vec<usize> {
    let v: Vec<T> = values.collect();
    let set: BTreeSet<T> = v.iter().cloned().collect();
    let pos: BTreeMap<T, usize> = set.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    v.iter().map(|s| pos[s]).collect()
}

/// Fixed-effects regression of one dependent statistic on turnover, return,
/// volatility, the group dummy and the shortable dummy.
pub fn fe_ols(samples: &[PanelSample], dependent: Dependent, se: StdErrorKind) -> Result<PanelFit> {
    let y: Vec<f64> = samples.iter().map(|s| s.dependent(dependent)).collect();
    let columns: Vec<Vec<f64>> = (0..REGRESSORS.len())
        .map(|j| samples.iter().map(|s| s.regressors()[j]).collect())
        .collect();
    let industry = labels(samples.iter().map(|s| s.industry_code.clone()));
    let time: Vec<usize> = samples.iter().map(|s| s.window).collect();
    let stocks = labels(samples.iter().map(|s| s.stock_id.clone()));
    let fit = fe_ols_columns(
        &y,
        &columns,
        &REGRESSORS,
        &industry,
        &time,
        se,
        Some(&stocks),
    )?;
    let coefficients = (0..REGRESSORS.len())
        .map(|j| Coefficient {
            name: REGRESSORS[j],
            estimate: fit.coefficients[j],
            std_error: fit.std_errors[j],
            t_stat: fit.t_stats[j],
            p_value: fit.p_values[j],
            stars: significance_stars(fit.p_values[j]),
        })
        .collect();
    Ok(PanelFit {
        dependent,
        coefficients,
        r_squared: fit.r_squared,
        adj_r_squared: fit.adj_r_squared,
        f_stat: fit.f_stat,
        n_obs: fit.n_obs,
        n_stocks: stocks.iter().collect::<BTreeSet<_>>().len(),
        industry_levels: fit.industry_levels,
        time_levels: fit.time_levels,
        industry_fe: fit.industry_levels > 1,
        time_fe: fit.time_levels > 1,
        std_errors: se,
    })
}

const LABEL_WIDTH: usize = 22;
const COL_WIDTH: usize = 14;

fn push_row(out: &mut String, label: &str, cells: impl Iterator<Item = String>) {
    out.push_str(&format!("{label:<LABEL_WIDTH$}"));
    for c in cells {
        out.push_str(&format!("{c:>COL_WIDTH$}"));
    }
    out.push('\n');
}

/// Fixed-width regression table: one column per fit, estimates with stars
/// and t-statistics in parentheses beneath.
pub fn report_table(fits: &[PanelFit]) -> String {
    let mut out = String::new();
    let rule = format!("{}\n", "-".repeat(LABEL_WIDTH + COL_WIDTH * fits.len()));
    push_row(
        &mut out,
        "",
        fits.iter().map(|f| f.dependent.header().0.to_string()),
    );
    push_row(
        &mut out,
        "",
        fits.iter().map(|f| f.dependent.header().1.to_string()),
    );
    out.push_str(&rule);
    for (j, label) in REGRESSOR_LABELS.iter().enumerate() {
        push_row(
            &mut out,
            label,
            fits.iter().map(|f| {
                format!(
                    "{}{}",
                    fmt_num(f.coefficients[j].estimate),
                    f.coefficients[j].stars
                )
            }),
        );
        push_row(
            &mut out,
            "",
            fits.iter()
                .map(|f| format!("({:.2})", f.coefficients[j].t_stat)),
        );
    }
    out.push_str(&rule);
    push_row(&mut out, "Obs.", fits.iter().map(|f| f.n_obs.to_string()));
    push_row(
        &mut out,
        "Stocks",
        fits.iter().map(|f| f.n_stocks.to_string()),
    );
    push_row(
        &mut out,
        "R-square adjusted",
        fits.iter().map(|f| format!("{:.3}", f.adj_r_squared)),
    );
    push_row(
        &mut out,
        "F-statistics",
        fits.iter().map(|f| format!("{:.2}", f.f_stat)),
    );
    let yes = |b: bool| if b { "YES" } else { "NO" }.to_string();
    push_row(
        &mut out,
        "Time fixed effect",
        fits.iter().map(|f| yes(f.time_fe)),
    );
    push_row(
        &mut out,
        "Industry fixed effect",
        fits.iter().map(|f| yes(f.industry_fe)),
    );
    out.push_str(&rule);
    out.push_str("*** p<0.01, ** p<0.05, * p<0.1; t-statistics in parentheses\n");
    out
}

fn fmt_num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ols::{design_with_intercept, ols_fit};

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    #[test]
    fn single_cell_reduces_to_plain_ols() {
        let mut s = 3;
        let n = 60;
        let x1: Vec<f64> = (0..n).map(|_| lcg(&mut s)).collect();
        let x2: Vec<f64> = (0..n).map(|_| lcg(&mut s)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.3 + 1.5 * x1[i] - 0.7 * x2[i] + 0.1 * lcg(&mut s))
            .collect();
        let fe = fe_ols_columns(
            &y,
            &[x1.clone(), x2.clone()],
            &["a", "b"],
            &vec![4; n],
            &vec![9; n],
            StdErrorKind::Classical,
            None,
        )
        .unwrap();
        let plain = ols_fit(&y, &design_with_intercept(&[&x1, &x2])).unwrap();
        for j in 0..2 {
            assert!((fe.coefficients[j] - plain.coefficients[j + 1]).abs() < 1e-12);
            assert!((fe.t_stats[j] - plain.diagnostics.t_stats[j + 1]).abs() < 1e-9);
        }
        assert!((fe.adj_r_squared - plain.diagnostics.adj_r_squared).abs() < 1e-12);
        assert_eq!(fe.industry_levels, 1);
    }

    #[test]
    fn constant_regressor_is_collinear() {
        let mut s = 5;
        let n = 40;
        let x: Vec<f64> = (0..n).map(|_| lcg(&mut s)).collect();
        let y: Vec<f64> = (0..n).map(|_| lcg(&mut s)).collect();
        let ind: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let tim: Vec<usize> = (0..n).map(|i| i % 4).collect();
        let err = fe_ols_columns(
            &y,
            &[x, vec![1.0; n]],
            &["x", "v"],
            &ind,
            &tim,
            StdErrorKind::Classical,
            None,
        )
        .unwrap_err();
        assert_eq!(err, Error::Collinear { column: "v".into() });
    }

    #[test]
    fn dependent_names_round_trip() {
        for d in Dependent::ALL {
            assert_eq!(d.name().parse::<Dependent>().unwrap(), d);
        }
        assert!("nope".parse::<Dependent>().is_err());
    }
}
