//! Daily price, factor, turnover, industry and event data aligned on a common
//! trading calendar, plus return construction and interval aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventAction, ShortSaleEvent};

pub type StockId = String;

pub const PRICES_FILE: &str = "prices.csv";
pub const FACTORS_FILE: &str = "factors.csv";
pub const TURNOVER_FILE: &str = "turnover.csv";
pub const META_FILE: &str = "meta.csv";
pub const EVENTS_FILE: &str = "events.csv";

pub(crate) const DATE_FORMAT: &str = "%Y-%m-%d";

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).ok()
}

/// Strictly increasing sequence of trading dates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TradingCalendar {
    dates: Vec<NaiveDate>,
}

impl TradingCalendar {
    pub fn new(dates: Vec<NaiveDate>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::Domain("trading calendar is empty".into()));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "trading calendar not strictly ascending at {}",
                w[1]
            )));
        }
        Ok(Self { dates })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted<I: IntoIterator<Item = NaiveDate>>(dates: I) -> Result<Self> {
        let set: BTreeSet<NaiveDate> = dates.into_iter().collect();
        Self::new(set.into_iter().collect())
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn first(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last(&self) -> NaiveDate {
        self.dates[self.dates.len() - 1]
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.dates.binary_search(&date).is_ok()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Trading dates in `[start, end)`.
    pub fn between(&self, start: NaiveDate, end: NaiveDate) -> &[NaiveDate] {
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d < end);
        &self.dates[lo..hi.max(lo)]
    }
}

/// Adjusted closing prices for one stock.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    pub stock_id: StockId,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    pub fn new(stock_id: impl Into<StockId>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let stock_id = stock_id.into();
        if let Some(w) = observations.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain(format!(
                "{stock_id}: price dates not strictly ascending at {}",
                w[1].0
            )));
        }
        if let Some((d, p)) = observations
            .iter()
            .find(|(_, p)| !(p.is_finite() && *p > 0.0))
        {
            return Err(Error::Domain(format!(
                "{stock_id}: non-positive price {p} on {d}"
            )));
        }
        Ok(Self {
            stock_id,
            observations,
        })
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Number of calendar trading days inside this stock's observed span with
    /// no price (trading halts).
    pub fn gap_count(&self, calendar: &TradingCalendar) -> usize {
        match (self.observations.first(), self.observations.last()) {
            (Some(first), Some(last)) => {
                let span = calendar.between(first.0, last.0.succ_opt().unwrap_or(last.0));
                span.len().saturating_sub(self.observations.len())
            }
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    Raw,
    Excess,
    Normalized,
}

impl fmt::Display for ReturnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnKind::Raw => "raw",
            ReturnKind::Excess => "excess",
            ReturnKind::Normalized => "normalized",
        })
    }
}

/// Date-aligned daily returns for one stock.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    stock_id: StockId,
    kind: ReturnKind,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(
        stock_id: impl Into<StockId>,
        kind: ReturnKind,
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let stock_id = stock_id.into();
        if dates.len() != values.len() {
            return Err(Error::Shape(format!(
                "{stock_id}: {} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "{stock_id}: return dates not strictly ascending at {}",
                w[1]
            )));
        }
        Ok(Self {
            stock_id,
            kind,
            dates,
            values,
        })
    }

    pub fn stock_id(&self) -> &str {
        &self.stock_id
    }

    pub fn kind(&self) -> ReturnKind {
        self.kind
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index range of observations dated in `[start, end)`.
    pub fn range_between(&self, start: NaiveDate, end: NaiveDate) -> std::ops::Range<usize> {
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d < end);
        lo..hi.max(lo)
    }

    pub fn values_between(&self, start: NaiveDate, end: NaiveDate) -> &[f64] {
        &self.values[self.range_between(start, end)]
    }

    /// Restricts to `[start, end)`, keeping id and kind.
    pub fn slice_between(&self, start: NaiveDate, end: NaiveDate) -> ReturnSeries {
        let r = self.range_between(start, end);
        ReturnSeries {
            stock_id: self.stock_id.clone(),
            kind: self.kind,
            dates: self.dates[r.clone()].to_vec(),
            values: self.values[r].to_vec(),
        }
    }

    pub fn value_on(&self, date: NaiveDate) -> Option<f64> {
        self.dates.binary_search(&date).ok().map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnoverSeries {
    pub stock_id: StockId,
    observations: Vec<(NaiveDate, f64)>,
}

impl TurnoverSeries {
    pub fn new(stock_id: impl Into<StockId>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let stock_id = stock_id.into();
        if let Some((d, v)) = observations
            .iter()
            .find(|(_, v)| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::Domain(format!(
                "{stock_id}: invalid turnover {v} on {d}"
            )));
        }
        if let Some(w) = observations.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain(format!(
                "{stock_id}: turnover dates not strictly ascending at {}",
                w[1].0
            )));
        }
        Ok(Self {
            stock_id,
            observations,
        })
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    /// Mean turnover over observations dated in `[start, end)`.
    pub fn mean_between(&self, start: NaiveDate, end: NaiveDate) -> Option<f64> {
        let lo = self.observations.partition_point(|o| o.0 < start);
        let hi = self.observations.partition_point(|o| o.0 < end);
        if hi <= lo {
            return None;
        }
        let obs = &self.observations[lo..hi];
        Some(obs.iter().map(|o| o.1).sum::<f64>() / obs.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StockMeta {
    pub stock_id: StockId,
    pub industry_code: String,
    /// First date with a price observation.
    pub listing_date: Option<NaiveDate>,
}

/// Daily market, size and value factor returns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorSeries {
    dates: Vec<NaiveDate>,
    values: Vec<[f64; 3]>,
}

impl FactorSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<[f64; 3]>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} factor dates but {} rows",
                dates.len(),
                values.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "factor dates not strictly ascending at {}",
                w[1]
            )));
        }
        Ok(Self { dates, values })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn on(&self, date: NaiveDate) -> Option<[f64; 3]> {
        self.dates.binary_search(&date).ok().map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnMethod {
    #[default]
    Log,
    Simple,
}

impl FromStr for ReturnMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log" => Ok(ReturnMethod::Log),
            "simple" => Ok(ReturnMethod::Simple),
            other => Err(Error::Config(format!("unknown return method `{other}`"))),
        }
    }
}

impl fmt::Display for ReturnMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnMethod::Log => "log",
            ReturnMethod::Simple => "simple",
        })
    }
}

/// Daily returns from consecutive available prices. Gaps (halts) are spanned
/// by the next available price.
pub fn compute_returns(prices: &PriceSeries, method: ReturnMethod) -> Result<ReturnSeries> {
    let obs = prices.observations();
    if obs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: obs.len(),
        });
    }
    let (dates, values) = obs
        .windows(2)
        .map(|w| {
            let ratio = w[1].1 / w[0].1;
            let r = match method {
                ReturnMethod::Log => ratio.ln(),
                ReturnMethod::Simple => ratio - 1.0,
            };
            (w[1].0, r)
        })
        .unzip();
    ReturnSeries::new(prices.stock_id.clone(), ReturnKind::Raw, dates, values)
}

/// Sums non-overlapping blocks of `k` consecutive returns; a trailing partial
/// block is dropped. Each block is dated by its last day.
pub fn aggregate_returns(r: &ReturnSeries, k: usize) -> Result<ReturnSeries> {
    if k < 1 {
        return Err(Error::Domain(
            "aggregation interval must be at least 1".into(),
        ));
    }
    if k == 1 {
        return Ok(r.clone());
    }
    let (dates, values) = r
        .values()
        .chunks_exact(k)
        .zip(r.dates().chunks_exact(k))
        .map(|(v, d)| (d[k - 1], v.iter().sum::<f64>()))
        .unzip();
    ReturnSeries::new(r.stock_id().to_string(), r.kind(), dates, values)
}

/// Sums non-overlapping blocks of a plain slice, dropping the trailing partial
/// block.
pub fn aggregate_values(values: &[f64], k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    values.chunks_exact(k).map(|c| c.iter().sum()).collect()
}

/// A rejected input row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowDiagnostic {
    pub file: String,
    /// 1-based line number including the header.
    pub line: usize,
    pub stock_id: Option<String>,
    pub date: Option<String>,
    pub reason: String,
}

impl fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)?;
        if let Some(s) = &self.stock_id {
            write!(f, " stock={s}")?;
        }
        if let Some(d) = &self.date {
            write!(f, " date={d}")?;
        }
        write!(f, ": {}", self.reason)
    }
}

/// All inputs for one run, aligned to the union trading calendar. Immutable
/// once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub calendar: TradingCalendar,
    pub prices: BTreeMap<StockId, PriceSeries>,
    pub factors: FactorSeries,
    pub turnover: BTreeMap<StockId, TurnoverSeries>,
    pub meta: BTreeMap<StockId, StockMeta>,
    pub events: Vec<ShortSaleEvent>,
    pub diagnostics: Vec<RowDiagnostic>,
}

impl Dataset {
    pub fn stock_ids(&self) -> impl Iterator<Item = &StockId> {
        self.prices.keys()
    }

    /// Stable JSON rendering used for determinism checks.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("dataset serializes")
    }

    /// Writes the five input CSVs into `dir`.
    pub fn write_csv_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

        let mut w = csv_writer(&dir.join(PRICES_FILE))?;
        write_row(&mut w, PRICES_FILE, ["stock_id", "date", "close"])?;
        for (id, s) in &self.prices {
            for (d, p) in s.observations() {
                write_row(
                    &mut w,
                    PRICES_FILE,
                    [id.clone(), d.to_string(), p.to_string()],
                )?;
            }
        }
        flush(w, PRICES_FILE)?;

        let mut w = csv_writer(&dir.join(FACTORS_FILE))?;
        write_row(&mut w, FACTORS_FILE, ["date", "mkt", "smb", "hml"])?;
        for (d, f) in self.factors.dates().iter().zip(self.factors.values()) {
            write_row(
                &mut w,
                FACTORS_FILE,
                [
                    d.to_string(),
                    f[0].to_string(),
                    f[1].to_string(),
                    f[2].to_string(),
                ],
            )?;
        }
        flush(w, FACTORS_FILE)?;

        let mut w = csv_writer(&dir.join(TURNOVER_FILE))?;
        write_row(&mut w, TURNOVER_FILE, ["stock_id", "date", "turnover"])?;
        for (id, s) in &self.turnover {
            for (d, v) in s.observations() {
                write_row(
                    &mut w,
                    TURNOVER_FILE,
                    [id.clone(), d.to_string(), v.to_string()],
                )?;
            }
        }
        flush(w, TURNOVER_FILE)?;

        let mut w = csv_writer(&dir.join(META_FILE))?;
        write_row(&mut w, META_FILE, ["stock_id", "industry_code"])?;
        for m in self.meta.values() {
            write_row(
                &mut w,
                META_FILE,
                [m.stock_id.clone(), m.industry_code.clone()],
            )?;
        }
        flush(w, META_FILE)?;

        let mut w = csv_writer(&dir.join(EVENTS_FILE))?;
        write_row(
            &mut w,
            EVENTS_FILE,
            ["effective_date", "stock_id", "action"],
        )?;
        for e in &self.events {
            write_row(
                &mut w,
                EVENTS_FILE,
                [
                    e.effective_date.to_string(),
                    e.stock_id.clone(),
                    e.action.to_string(),
                ],
            )?;
        }
        flush(w, EVENTS_FILE)
    }
}

fn io_err(path: &Path, e: impl fmt::Display) -> Error {
    Error::Io {
        file: path.display().to_string(),
        message: e.to_string(),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn write_row<I, T>(w: &mut csv::Writer<File>, file: &str, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| Error::Io {
        file: file.into(),
        message: e.to_string(),
    })
}

fn flush(mut w: csv::Writer<File>, file: &str) -> Result<()> {
    w.flush().map_err(|e| Error::Io {
        file: file.into(),
        message: e.to_string(),
    })
}

/// Paths of the five input files.
#[derive(Debug, Clone)]
pub struct DatasetFiles {
    pub prices: PathBuf,
    pub factors: PathBuf,
    pub turnover: PathBuf,
    pub meta: PathBuf,
    pub events: PathBuf,
}

impl DatasetFiles {
    /// Standard file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            prices: dir.join(PRICES_FILE),
            factors: dir.join(FACTORS_FILE),
            turnover: dir.join(TURNOVER_FILE),
            meta: dir.join(META_FILE),
            events: dir.join(EVENTS_FILE),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Closed set of admissible industry codes; `None` accepts any code.
    pub industry_codes: Option<BTreeSet<String>>,
}

pub fn ingest_dataset(files: &DatasetFiles, opts: &IngestOptions) -> Result<Dataset> {
    let open = |p: &Path| File::open(p).map_err(|e| io_err(p, e));
    ingest_readers(
        open(&files.prices)?,
        open(&files.factors)?,
        open(&files.turnover)?,
        open(&files.meta)?,
        open(&files.events)?,
        opts,
    )
}

struct Table {
    file: &'static str,
    columns: Vec<usize>,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Table {
    fn field<'r>(&self, rec: &'r csv::StringRecord, col: usize) -> &'r str {
        rec.get(self.columns[col]).unwrap_or("").trim()
    }
}

fn read_table<R: Read>(
    reader: R,
    file: &'static str,
    required: &[&str],
    allow_empty: bool,
) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Io {
            file: file.into(),
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::EmptyInput { file: file.into() });
    }
    let columns = required
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}') == *name)
                .ok_or_else(|| Error::Schema {
                    file: file.into(),
                    column: (*name).into(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io {
            file: file.into(),
            message: e.to_string(),
        })?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows.push((i + 2, rec));
    }
    if rows.is_empty() && !allow_empty {
        return Err(Error::EmptyInput { file: file.into() });
    }
    Ok(Table {
        file,
        columns,
        rows,
    })
}

fn reject(
    diags: &mut Vec<RowDiagnostic>,
    file: &str,
    line: usize,
    stock_id: Option<&str>,
    date: Option<&str>,
    reason: impl Into<String>,
) {
    diags.push(RowDiagnostic {
        file: file.into(),
        line,
        stock_id: stock_id.map(str::to_string),
        date: date.map(str::to_string),
        reason: reason.into(),
    });
}

/// Parses and aligns the five inputs. Bad rows are rejected with a row-level
/// diagnostic; structural problems (missing column, duplicate key, empty
/// file) abort ingestion. `events.csv` may contain only its header.
pub fn ingest_readers<R1: Read, R2: Read, R3: Read, R4: Read, R5: Read>(
    prices: R1,
    factors: R2,
    turnover: R3,
    meta: R4,
    events: R5,
    opts: &IngestOptions,
) -> Result<Dataset> {
    let mut diags = Vec::new();

    let t = read_table(prices, PRICES_FILE, &["stock_id", "date", "close"], false)?;
    let mut price_map: BTreeMap<StockId, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let (id, ds, ps) = (t.field(rec, 0), t.field(rec, 1), t.field(rec, 2));
        let Some(date) = parse_date(ds) else {
            reject(
                &mut diags,
                t.file,
                *line,
                Some(id),
                Some(ds),
                "unparseable date",
            );
            continue;
        };
        let price = match ps.parse::<f64>() {
            Ok(p) if p.is_finite() && p > 0.0 => p,
            Ok(_) => {
                reject(
                    &mut diags,
                    t.file,
                    *line,
                    Some(id),
                    Some(ds),
                    "non-positive price",
                );
                continue;
            }
            Err(_) => {
                reject(
                    &mut diags,
                    t.file,
                    *line,
                    Some(id),
                    Some(ds),
                    "unparseable price",
                );
                continue;
            }
        };
        if price_map
            .entry(id.to_string())
            .or_default()
            .insert(date, price)
            .is_some()
        {
            return Err(Error::Duplicate {
                file: t.file.into(),
                key: format!("({id}, {date})"),
            });
        }
    }

    let t = read_table(factors, FACTORS_FILE, &["date", "mkt", "smb", "hml"], false)?;
    let mut factor_map: BTreeMap<NaiveDate, [f64; 3]> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let ds = t.field(rec, 0);
        let Some(date) = parse_date(ds) else {
            reject(
                &mut diags,
                t.file,
                *line,
                None,
                Some(ds),
                "unparseable date",
            );
            continue;
        };
        let parsed: Option<Vec<f64>> = (1..4)
            .map(|c| {
                t.field(rec, c)
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
            })
            .collect();
        let Some(v) = parsed else {
            reject(
                &mut diags,
                t.file,
                *line,
                None,
                Some(ds),
                "unparseable factor value",
            );
            continue;
        };
        if factor_map.insert(date, [v[0], v[1], v[2]]).is_some() {
            return Err(Error::Duplicate {
                file: t.file.into(),
                key: format!("({date})"),
            });
        }
    }

    let calendar = TradingCalendar::from_unsorted(
        price_map
            .values()
            .flat_map(|m| m.keys().copied())
            .chain(factor_map.keys().copied()),
    )?;

    let t = read_table(
        turnover,
        TURNOVER_FILE,
        &["stock_id", "date", "turnover"],
        false,
    )?;
    let mut turnover_map: BTreeMap<StockId, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let (id, ds, vs) = (t.field(rec, 0), t.field(rec, 1), t.field(rec, 2));
        let Some(date) = parse_date(ds) else {
            reject(
                &mut diags,
                t.file,
                *line,
                Some(id),
                Some(ds),
                "unparseable date",
            );
            continue;
        };
        if !calendar.contains(date) {
            reject(
                &mut diags,
                t.file,
                *line,
                Some(id),
                Some(ds),
                "date not on trading calendar",
            );
            continue;
        }
        let v = match vs.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => v,
            _ => {
                reject(
                    &mut diags,
                    t.file,
                    *line,
                    Some(id),
                    Some(ds),
                    "invalid turnover",
                );
                continue;
            }
        };
        if turnover_map
            .entry(id.to_string())
            .or_default()
            .insert(date, v)
            .is_some()
        {
            return Err(Error::Duplicate {
                file: t.file.into(),
                key: format!("({id}, {date})"),
            });
        }
    }

    let t = read_table(meta, META_FILE, &["stock_id", "industry_code"], false)?;
    let mut meta_map: BTreeMap<StockId, StockMeta> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let (id, code) = (t.field(rec, 0), t.field(rec, 1));
        if let Some(allowed) = &opts.industry_codes {
            if !allowed.contains(code) {
                reject(
                    &mut diags,
                    t.file,
                    *line,
                    Some(id),
                    None,
                    format!("industry code `{code}` not in configured set"),
                );
                continue;
            }
        }
        let listing_date = price_map.get(id).and_then(|m| m.keys().next().copied());
        let entry = StockMeta {
            stock_id: id.to_string(),
            industry_code: code.to_string(),
            listing_date,
        };
        if meta_map.insert(id.to_string(), entry).is_some() {
            return Err(Error::Duplicate {
                file: t.file.into(),
                key: format!("({id})"),
            });
        }
    }

    let t = read_table(
        events,
        EVENTS_FILE,
        &["effective_date", "stock_id", "action"],
        true,
    )?;
    let mut event_list = Vec::new();
    for (line, rec) in &t.rows {
        let (ds, id, act) = (t.field(rec, 0), t.field(rec, 1), t.field(rec, 2));
        let Some(date) = parse_date(ds) else {
            reject(
                &mut diags,
                t.file,
                *line,
                Some(id),
                Some(ds),
                "unparseable date",
            );
            continue;
        };
        let Ok(action) = act.parse::<EventAction>() else {
            reject(
                &mut diags,
                t.file,
                *line,
                Some(id),
                Some(ds),
                format!("unknown action `{act}`"),
            );
            continue;
        };
        event_list.push(ShortSaleEvent {
            effective_date: date,
            stock_id: id.to_string(),
            action,
        });
    }

    let prices = price_map
        .into_iter()
        .map(|(id, m)| {
            let s = PriceSeries::new(id.clone(), m.into_iter().collect())?;
            Ok((id, s))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    let turnover = turnover_map
        .into_iter()
        .map(|(id, m)| {
            let s = TurnoverSeries::new(id.clone(), m.into_iter().collect())?;
            Ok((id, s))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    let (fd, fv): (Vec<_>, Vec<_>) = factor_map.into_iter().unzip();

    Ok(Dataset {
        calendar,
        prices,
        factors: FactorSeries::new(fd, fv)?,
        turnover,
        meta: meta_map,
        events: event_list,
        diagnostics: diags,
    })
}
