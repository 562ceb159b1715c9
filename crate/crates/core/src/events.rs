//! Designated short-sale list: replay of add/delete events into per-stock
//! membership intervals, group assignment and the per-window shortable dummy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{StockId, TradingCalendar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventAction {
    // Declaration order fixes same-date processing: deletes before adds.
    Delete,
    Add,
}

impl FromStr for EventAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "add" => Ok(EventAction::Add),
            "delete" => Ok(EventAction::Delete),
            other => Err(Error::Domain(format!("unknown event action `{other}`"))),
        }
    }
}

impl fmt::Display for EventAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventAction::Add => "add",
            EventAction::Delete => "delete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortSaleEvent {
    pub effective_date: NaiveDate,
    pub stock_id: StockId,
    pub action: EventAction,
}

impl ShortSaleEvent {
    pub fn add(date: NaiveDate, stock_id: impl Into<StockId>) -> Self {
        Self {
            effective_date: date,
            stock_id: stock_id.into(),
            action: EventAction::Add,
        }
    }

    pub fn delete(date: NaiveDate, stock_id: impl Into<StockId>) -> Self {
        Self {
            effective_date: date,
            stock_id: stock_id.into(),
            action: EventAction::Delete,
        }
    }
}

/// Half-open membership interval `[start, end)`; `end == None` means still on
/// the list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub start: NaiveDate,
    pub end: Option<NaiveDate>,
}

impl Membership {
    pub fn contains(&self, date: NaiveDate) -> bool {
        date >= self.start && self.end.is_none_or(|e| date < e)
    }
}

/// End-of-day list statistics for one event date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DailyCount {
    pub date: NaiveDate,
    pub added: usize,
    pub deleted: usize,
    pub on_list: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListTimeline {
    intervals: BTreeMap<StockId, Vec<Membership>>,
    counts: Vec<DailyCount>,
}

impl ListTimeline {
    pub fn intervals(&self) -> &BTreeMap<StockId, Vec<Membership>> {
        &self.intervals
    }

    pub fn memberships(&self, stock_id: &str) -> &[Membership] {
        self.intervals.get(stock_id).map_or(&[], Vec::as_slice)
    }

    /// One row per distinct event date.
    pub fn counts(&self) -> &[DailyCount] {
        &self.counts
    }

    pub fn total_added(&self) -> usize {
        self.counts.iter().map(|c| c.added).sum()
    }

    pub fn total_deleted(&self) -> usize {
        self.counts.iter().map(|c| c.deleted).sum()
    }

    /// List size at the end of `date` from the running event counts.
    pub fn count_on(&self, date: NaiveDate) -> usize {
        let i = self.counts.partition_point(|c| c.date <= date);
        if i == 0 {
            0
        } else {
            self.counts[i - 1].on_list
        }
    }

    /// List size on `date` from the interval representation.
    pub fn members_on(&self, date: NaiveDate) -> usize {
        self.intervals
            .values()
            .filter(|iv| iv.iter().any(|m| m.contains(date)))
            .count()
    }

    pub fn is_listed(&self, stock_id: &str, date: NaiveDate) -> bool {
        self.memberships(stock_id).iter().any(|m| m.contains(date))
    }

    /// Date of the first addition of any stock.
    pub fn launch_date(&self) -> Option<NaiveDate> {
        self.intervals
            .values()
            .filter_map(|v| v.first())
            .map(|m| m.start)
            .min()
    }

    pub fn first_addition(&self, stock_id: &str) -> Option<NaiveDate> {
        self.memberships(stock_id).first().map(|m| m.start)
    }
}

/// Replays events after a stable sort by (date, deletes first).
pub fn replay_events(events: &[ShortSaleEvent]) -> Result<ListTimeline> {
    let mut sorted: Vec<&ShortSaleEvent> = events.iter().collect();
    sorted.sort_by_key(|e| (e.effective_date, e.action));

    let mut intervals: BTreeMap<StockId, Vec<Membership>> = BTreeMap::new();
    let mut on_list: BTreeSet<&str> = BTreeSet::new();
    let mut counts: Vec<DailyCount> = Vec::new();

    for e in sorted {
        let row = match counts.last_mut() {
            Some(c) if c.date == e.effective_date => c,
            _ => {
                counts.push(DailyCount {
                    date: e.effective_date,
                    added: 0,
                    deleted: 0,
                    on_list: on_list.len(),
                });
                counts.last_mut().unwrap()
            }
        };
        match e.action {
            EventAction::Add => {
                if !on_list.insert(e.stock_id.as_str()) {
                    return Err(inconsistent(e));
                }
                intervals
                    .entry(e.stock_id.clone())
                    .or_default()
                    .push(Membership {
                        start: e.effective_date,
                        end: None,
                    });
                row.added += 1;
            }
            EventAction::Delete => {
                if !on_list.remove(e.stock_id.as_str()) {
                    return Err(inconsistent(e));
                }
                // Deletes sort ahead of same-date adds, so the open interval
                // always started on an earlier date.
                let open = intervals
                    .get_mut(&e.stock_id)
                    .and_then(|v| v.last_mut())
                    .expect("listed stock has an open interval");
                open.end = Some(e.effective_date);
                row.deleted += 1;
            }
        }
        row.on_list = on_list.len();
    }
    Ok(ListTimeline { intervals, counts })
}

fn inconsistent(e: &ShortSaleEvent) -> Error {
    Error::InconsistentEvent {
        stock_id: e.stock_id.clone(),
        date: e.effective_date,
        action: e.action.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    /// On the list at least once by the as-of date.
    Group1,
    /// Never eligible.
    Group2,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::Group1 => "group1",
            Group::Group2 => "group2",
        }
    }
}

pub fn assign_groups<'a, I>(
    timeline: &ListTimeline,
    universe: I,
    as_of: NaiveDate,
) -> BTreeMap<StockId, Group>
where
    I: IntoIterator<Item = &'a StockId>,
{
    universe
        .into_iter()
        .map(|id| {
            let g = if timeline.memberships(id).iter().any(|m| m.start <= as_of) {
                Group::Group1
            } else {
                Group::Group2
            };
            (id.clone(), g)
        })
        .collect()
}

/// 1 iff the stock is listed on strictly more than half of the trading days in
/// `[start, end)`.
pub fn shortable_dummy(
    stock_id: &str,
    start: NaiveDate,
    end: NaiveDate,
    timeline: &ListTimeline,
    calendar: &TradingCalendar,
) -> u8 {
    let days = calendar.between(start, end);
    if days.is_empty() {
        return 0;
    }
    let shortable = days
        .iter()
        .filter(|d| timeline.is_listed(stock_id, **d))
        .count();
    u8::from(2 * shortable > days.len())
}

/// Aggregate changes to the Chinese designated short-sale list from its
/// launch to the end of 2013: (effective date, additions, deletions).
pub const DESIGNATED_LIST_HISTORY: [(&str, usize, usize); 20] = [
    ("2010-03-31", 90, 0),
    ("2010-07-01", 5, 5),
    ("2010-07-29", 1, 1),
    ("2011-12-05", 189, 1),
    ("2012-06-04", 2, 0),
    ("2012-10-29", 1, 0),
    ("2013-01-31", 276, 0),
    ("2013-03-06", 0, 1),
    ("2013-03-07", 0, 1),
    ("2013-03-26", 0, 2),
    ("2013-03-29", 1, 2),
    ("2013-04-10", 1, 0),
    ("2013-04-24", 1, 0),
    ("2013-05-02", 0, 1),
    ("2013-05-03", 0, 1),
    ("2013-05-27", 1, 0),
    ("2013-07-25", 1, 0),
    ("2013-08-05", 0, 2),
    ("2013-09-16", 205, 0),
    ("2013-12-04", 1, 0),
];

/// Expands aggregate (date, adds, deletes) rows into stock-level events with
/// synthetic ids `L0001`, `L0002`, ... Deletions remove the longest-listed
/// members first.
pub fn anonymous_events(rows: &[(NaiveDate, usize, usize)]) -> Result<Vec<ShortSaleEvent>> {
    let mut members: std::collections::VecDeque<StockId> = Default::default();
    let mut next = 0usize;
    let mut out = Vec::new();
    for &(date, added, deleted) in rows {
        for _ in 0..deleted {
            let id = members
                .pop_front()
                .ok_or_else(|| Error::InconsistentEvent {
                    stock_id: "<none>".into(),
                    date,
                    action: EventAction::Delete.to_string(),
                })?;
            out.push(ShortSaleEvent::delete(date, id));
        }
        for _ in 0..added {
            next += 1;
            let id = format!("L{next:04}");
            members.push_back(id.clone());
            out.push(ShortSaleEvent::add(date, id));
        }
    }
    Ok(out)
}

/// The designated-list history as parsed rows.
pub fn designated_list_history() -> Vec<(NaiveDate, usize, usize)> {
    DESIGNATED_LIST_HISTORY
        .iter()
        .map(|(d, a, r)| {
            (
                NaiveDate::parse_from_str(d, "%Y-%m-%d").expect("valid date"),
                *a,
                *r,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::parse_date;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    #[test]
    fn add_then_delete_forms_half_open_interval() {
        let tl = replay_events(&[
            ShortSaleEvent::add(d("2010-03-31"), "A"),
            ShortSaleEvent::delete(d("2010-07-01"), "A"),
        ])
        .unwrap();
        assert!(tl.is_listed("A", d("2010-03-31")));
        assert!(tl.is_listed("A", d("2010-06-30")));
        assert!(!tl.is_listed("A", d("2010-07-01")));
        assert_eq!(tl.count_on(d("2010-04-01")), 1);
        assert_eq!(tl.count_on(d("2010-07-01")), 0);
    }

    #[test]
    fn illegal_events_name_stock_and_date() {
        let err = replay_events(&[ShortSaleEvent::delete(d("2011-01-04"), "X")]).unwrap_err();
        assert_eq!(
            err,
            Error::InconsistentEvent {
                stock_id: "X".into(),
                date: d("2011-01-04"),
                action: "delete".into()
            }
        );
        let err = replay_events(&[
            ShortSaleEvent::add(d("2011-01-04"), "X"),
            ShortSaleEvent::add(d("2011-02-04"), "X"),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::InconsistentEvent { .. }));
    }

    #[test]
    fn same_date_swap_deletes_first() {
        let tl = replay_events(&[
            ShortSaleEvent::add(d("2010-03-31"), "A"),
            ShortSaleEvent::add(d("2010-07-01"), "A"),
            ShortSaleEvent::delete(d("2010-07-01"), "A"),
        ])
        .unwrap();
        assert_eq!(tl.memberships("A").len(), 2);
        assert!(tl.is_listed("A", d("2010-07-01")));
    }

    #[test]
    fn groups_use_at_least_once_rule() {
        let tl = replay_events(&[
            ShortSaleEvent::add(d("2010-03-31"), "A"),
            ShortSaleEvent::add(d("2010-03-31"), "B"),
            ShortSaleEvent::delete(d("2011-03-31"), "B"),
            ShortSaleEvent::add(d("2014-06-30"), "D"),
        ])
        .unwrap();
        let universe: Vec<StockId> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
        let g = assign_groups(&tl, &universe, d("2014-03-31"));
        assert_eq!(g["A"], Group::Group1);
        assert_eq!(g["B"], Group::Group1);
        assert_eq!(g["C"], Group::Group2);
        assert_eq!(g["D"], Group::Group2);
    }

    #[test]
    fn dummy_requires_strictly_more_than_half() {
        let cal = TradingCalendar::new(
            (0..10)
                .map(|i| d("2012-01-02") + chrono::Days::new(i))
                .collect(),
        )
        .unwrap();
        let start = d("2012-01-02");
        let end = d("2012-01-12");
        let full = replay_events(&[ShortSaleEvent::add(start, "A")]).unwrap();
        assert_eq!(shortable_dummy("A", start, end, &full, &cal), 1);
        let half = replay_events(&[ShortSaleEvent::add(d("2012-01-07"), "A")]).unwrap();
        assert_eq!(shortable_dummy("A", start, end, &half, &cal), 0);
        let more = replay_events(&[ShortSaleEvent::add(d("2012-01-06"), "A")]).unwrap();
        assert_eq!(shortable_dummy("A", start, end, &more, &cal), 1);
        assert_eq!(shortable_dummy("Z", start, end, &more, &cal), 0);
    }
}
