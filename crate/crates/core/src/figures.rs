//! Plot data: the pooled return distribution and the before/after
//! comparison of skewness and return-volatility correlation across return
//! intervals for the two groups.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::{assign_groups, Group, ListTimeline};
use crate::market_data::{aggregate_values, ReturnSeries, StockId};
use crate::stats::{
    distribution_data, mean, one_sample_t_test, return_volatility_correlation, sample_std,
    skewness, DistributionData, TTest,
};

/// Return intervals in trading days.
pub const INTERVALS: [usize; 5] = [1, 2, 3, 5, 10];

/// Fewest aggregated observations for a stock to enter an interval point.
pub const MIN_AGGREGATED_OBS: usize = 10;

pub const DEFAULT_BINS: usize = 60;

/// Pooled normalized excess returns of all stocks.
pub fn pooled_distribution<'a>(
    series: impl IntoIterator<Item = &'a ReturnSeries>,
    n_bins: usize,
) -> Result<DistributionData> {
    let pooled: Vec<f64> = series
        .into_iter()
        .flat_map(|s| s.values().iter().copied())
        .collect();
    distribution_data(&pooled, n_bins)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Before,
    After,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Before => "before",
            Phase::After => "after",
        }
    }
}

/// One stock's returns with its group and split date.
#[derive(Debug, Clone)]
pub struct SplitSeries<'a> {
    pub series: &'a ReturnSeries,
    pub group: Group,
    /// First day of the "after" phase.
    pub split: NaiveDate,
}

impl SplitSeries<'_> {
    pub fn phase(&self, phase: Phase) -> &[f64] {
        let idx = self.series.dates().partition_point(|d| *d < self.split);
        let v = self.series.values();
        match phase {
            Phase::Before => &v[..idx],
            Phase::After => &v[idx..],
        }
    }
}

/// Split date per stock: its first addition for group 1, the list launch for
/// group 2. Stocks whose group-1 addition falls after `as_of` never occur
/// (they are group 2 by construction).
pub fn split_dates<'a, I>(
    timeline: &ListTimeline,
    stock_ids: I,
    as_of: NaiveDate,
) -> Result<BTreeMap<StockId, (Group, NaiveDate)>>
where
    I: IntoIterator<Item = &'a StockId>,
{
    let launch = timeline
        .launch_date()
        .ok_or_else(|| Error::DegenerateSample("designated list has no additions".into()))?;
    let groups = assign_groups(timeline, stock_ids, as_of);
    Ok(groups
        .into_iter()
        .map(|(id, g)| {
            let split = match g {
                Group::Group1 => timeline.first_addition(&id).unwrap_or(launch),
                Group::Group2 => launch,
            };
            (id, (g, split))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalStatistic {
    Skewness,
    Correlation,
}

impl IntervalStatistic {
    fn eval(self, x: &[f64]) -> Result<f64> {
        match self {
            IntervalStatistic::Skewness => skewness(x),
            IntervalStatistic::Correlation => return_volatility_correlation(x),
        }
    }
}

/// Cross-sectional mean of a per-stock statistic at one interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalPoint {
    pub group: Group,
    pub phase: Phase,
    pub interval: usize,
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub n_stocks: usize,
}

/// The statistic of each stock's non-overlapping k-day sums, for every
/// group × phase × interval cell.
pub fn interval_curves(
    stocks: &[SplitSeries<'_>],
    statistic: IntervalStatistic,
    intervals: &[usize],
) -> Vec<IntervalPoint> {
    let mut out = Vec::new();
    for group in [Group::Group1, Group::Group2] {
        for phase in [Phase::Before, Phase::After] {
            for &k in intervals {
                let vals: Vec<f64> = stocks
                    .iter()
                    .filter(|s| s.group == group)
                    .filter_map(|s| {
                        let agg = aggregate_values(s.phase(phase), k);
                        if agg.len() < MIN_AGGREGATED_OBS {
                            return None;
                        }
                        statistic.eval(&agg).ok()
                    })
                    .collect();
                let n = vals.len();
                out.push(IntervalPoint {
                    group,
                    phase,
                    interval: k,
                    mean: if n > 0 { mean(&vals) } else { f64::NAN },
                    std_error: if n > 1 {
                        sample_std(&vals) / ((n - 1) as f64).sqrt()
                    } else {
                        f64::NAN
                    },
                    n_stocks: n,
                });
            }
        }
    }
    out
}

/// Paired comparison of a statistic after versus before the split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeforeAfter {
    pub group: Group,
    pub mean_before: f64,
    pub mean_after: f64,
    /// t-test on per-stock differences (after − before).
    pub test: TTest,
    pub n_stocks: usize,
}

pub fn before_after_test(
    stocks: &[SplitSeries<'_>],
    group: Group,
    statistic: IntervalStatistic,
    min_obs: usize,
) -> Result<BeforeAfter> {
    let mut before = Vec::new();
    let mut after = Vec::new();
    for s in stocks.iter().filter(|s| s.group == group) {
        let (b, a) = (s.phase(Phase::Before), s.phase(Phase::After));
        if b.len() <= min_obs || a.len() <= min_obs {
            continue;
        }
        if let (Ok(sb), Ok(sa)) = (statistic.eval(b), statistic.eval(a)) {
            before.push(sb);
            after.push(sa);
        }
    }
    let diffs: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();
    let test = one_sample_t_test(&diffs, 0.0)?;
    Ok(BeforeAfter {
        group,
        mean_before: mean(&before),
        mean_after: mean(&after),
        test,
        n_stocks: diffs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{replay_events, ShortSaleEvent};
    use crate::market_data::ReturnKind;
    use chrono::Days;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn split_dates_follow_groups() {
        let tl = replay_events(&[
            ShortSaleEvent::add(d(2010, 3, 31), "A"),
            ShortSaleEvent::add(d(2012, 1, 5), "B"),
        ])
        .unwrap();
        let ids: Vec<StockId> = vec!["A".into(), "B".into(), "C".into()];
        let s = split_dates(&tl, &ids, d(2014, 3, 31)).unwrap();
        assert_eq!(s["A"], (Group::Group1, d(2010, 3, 31)));
        assert_eq!(s["B"], (Group::Group1, d(2012, 1, 5)));
        assert_eq!(s["C"], (Group::Group2, d(2010, 3, 31)));
    }

    #[test]
    fn phases_partition_the_series() {
        let start = d(2010, 1, 1);
        let dates: Vec<_> = (0..100).map(|i| start + Days::new(i)).collect();
        let r = ReturnSeries::new(
            "A",
            ReturnKind::Normalized,
            dates,
            (0..100).map(f64::from).collect(),
        )
        .unwrap();
        let s = SplitSeries {
            series: &r,
            group: Group::Group1,
            split: start + Days::new(30),
        };
        assert_eq!(s.phase(Phase::Before).len(), 30);
        assert_eq!(s.phase(Phase::After)[0], 30.0);
    }

    #[test]
    fn interval_curves_skip_short_phases() {
        let start = d(2010, 1, 1);
        let dates: Vec<_> = (0..60).map(|i| start + Days::new(i)).collect();
        let vals: Vec<f64> = (0..60).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let r = ReturnSeries::new("A", ReturnKind::Normalized, dates, vals).unwrap();
        let s = [SplitSeries {
            series: &r,
            group: Group::Group1,
            split: start + Days::new(30),
        }];
        let pts = interval_curves(&s, IntervalStatistic::Skewness, &INTERVALS);
        assert_eq!(pts.len(), 20);
        let g1_before: Vec<_> = pts
            .iter()
            .filter(|p| p.group == Group::Group1 && p.phase == Phase::Before)
            .collect();
        // 30 days: intervals 1, 2 and 3 have ≥ 10 blocks, 5 and 10 do not.
        assert_eq!(
            g1_before.iter().map(|p| p.n_stocks).collect::<Vec<_>>(),
            [1, 1, 1, 0, 0]
        );
        assert!(pts
            .iter()
            .filter(|p| p.group == Group::Group2)
            .all(|p| p.n_stocks == 0));
    }
}
