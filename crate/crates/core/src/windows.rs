//! Calendar-aligned, non-overlapping sample windows.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Windowing {
    #[default]
    Quarter,
    HalfYear,
}

impl Windowing {
    pub fn months(self) -> u32 {
        match self {
            Windowing::Quarter => 3,
            Windowing::HalfYear => 6,
        }
    }
}

impl FromStr for Windowing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quarter" | "quarterly" => Ok(Windowing::Quarter),
            "half_year" | "half-year" | "halfyear" => Ok(Windowing::HalfYear),
            other => Err(Error::Config(format!("unknown windowing `{other}`"))),
        }
    }
}

impl fmt::Display for Windowing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Windowing::Quarter => "quarter",
            Windowing::HalfYear => "half_year",
        })
    }
}

/// A sample window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub index: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Window {
    pub fn label(&self) -> String {
        format!("{}..{}", self.start, self.end)
    }
}

/// Start of the calendar block (of `months` length, aligned to January) that
/// contains `date`.
pub fn block_start(date: NaiveDate, months: u32) -> NaiveDate {
    let m0 = (date.month0() / months) * months;
    NaiveDate::from_ymd_opt(date.year(), m0 + 1, 1).expect("valid block start")
}

pub fn quarter_start(date: NaiveDate) -> NaiveDate {
    block_start(date, 3)
}

/// First calendar-quarter start on or after `date`.
pub fn next_quarter_start(date: NaiveDate) -> NaiveDate {
    let q = quarter_start(date);
    if q == date {
        q
    } else {
        q + Months::new(3)
    }
}

/// Calendar windows intersecting `[first, last]` (both inclusive), clipped to
/// that span. Window boundaries follow Jan/Apr/Jul/Oct for quarters and
/// Jan/Jul for half-years.
pub fn calendar_windows(first: NaiveDate, last: NaiveDate, windowing: Windowing) -> Vec<Window> {
    let months = windowing.months();
    let stop = last.succ_opt().unwrap_or(last);
    let mut out = Vec::new();
    let mut start = block_start(first, months);
    while start < stop {
        let end = start + Months::new(months);
        out.push(Window {
            index: out.len(),
            start: start.max(first),
            end: end.min(stop),
        });
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn study_period_window_counts() {
        let q = calendar_windows(d(2006, 1, 1), d(2014, 3, 31), Windowing::Quarter);
        assert_eq!(q.len(), 33);
        assert_eq!(q[32].start, d(2014, 1, 1));
        assert_eq!(q[32].end, d(2014, 4, 1));
        let h = calendar_windows(d(2006, 1, 1), d(2014, 3, 31), Windowing::HalfYear);
        assert_eq!(h.len(), 17);
        assert_eq!(h[16].end, d(2014, 4, 1));
    }

    #[test]
    fn windows_tile_without_overlap() {
        let w = calendar_windows(d(2006, 2, 15), d(2007, 8, 3), Windowing::Quarter);
        assert_eq!(w[0].start, d(2006, 2, 15));
        for pair in w.windows(2) {
            assert_eq!(pair[0].end, pair[1].start);
        }
        assert_eq!(w.last().unwrap().end, d(2007, 8, 4));
    }

    #[test]
    fn quarter_helpers() {
        assert_eq!(quarter_start(d(2010, 5, 17)), d(2010, 4, 1));
        assert_eq!(next_quarter_start(d(2010, 4, 1)), d(2010, 4, 1));
        assert_eq!(next_quarter_start(d(2010, 4, 2)), d(2010, 7, 1));
        assert_eq!(next_quarter_start(d(2010, 11, 2)), d(2011, 1, 1));
    }
}
