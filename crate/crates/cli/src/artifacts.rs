//! Stage artifact files: names, writers and readers.
//!
//! Floats are written in shortest round-trip form, so reading an artifact
//! back reproduces the values bit for bit.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use asymmetry_core::egarch::EgarchParams;
use asymmetry_core::market_data::{ReturnKind, ReturnSeries};
use asymmetry_core::pipeline::{StockReturns, StockVolatility};
use chrono::NaiveDate;
use serde::Serialize;

use crate::CliError;

pub const RETURNS: &str = "returns.csv";
pub const EXCESS_STOCKS: &str = "excess_stocks.csv";
pub const EGARCH_FITS: &str = "egarch_fits.csv";
pub const NORMALIZED: &str = "normalized.csv";
pub const PER_STOCK_STATS: &str = "per_stock_stats.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const DENSITY: &str = "density.csv";
pub const ECDF: &str = "ecdf.csv";
pub const TAILS: &str = "tails.csv";
pub const SKEW_INTERVAL: &str = "skew_interval.csv";
pub const CORR_INTERVAL: &str = "corr_interval.csv";
pub const BEFORE_AFTER: &str = "before_after.json";
pub const RUN_MANIFEST: &str = "run_manifest.json";

pub fn panel_samples(windowing: &str) -> String {
    format!("panel_samples_{windowing}.csv")
}

pub fn panel_exclusions(windowing: &str) -> String {
    format!("panel_exclusions_{windowing}.csv")
}

pub fn panel_fits(windowing: &str) -> String {
    format!("panel_fits_{windowing}.json")
}

pub fn panel_table(windowing: &str) -> String {
    format!("table_{windowing}.txt")
}

fn write_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("cannot write {}: {e}", path.display()))
}

fn read_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("malformed artifact {}: {e}", path.display()))
}

pub fn require(dir: &Path, name: &str, stage: &'static str) -> Result<PathBuf, CliError> {
    let p = dir.join(name);
    if p.is_file() {
        Ok(p)
    } else {
        Err(CliError::Dependency {
            artifact: p.display().to_string(),
            stage,
        })
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| write_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| write_err(path, e))?;
    s.push('\n');
    write_text(path, &s)
}

/// Writes a header row and string records.
pub fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| write_err(path, e))?;
    w.write_record(header).map_err(|e| write_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| write_err(path, e))
}

/// Writes serde records with a derived header.
pub fn write_records<T: Serialize>(
    path: &Path,
    rows: &[T],
    header_if_empty: &[&str],
) -> Result<(), CliError> {
    if rows.is_empty() {
        return write_rows(path, header_if_empty, std::iter::empty::<Vec<String>>());
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| write_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| write_err(path, e))
}

fn read_rows(path: &Path) -> Result<Vec<csv::StringRecord>, CliError> {
    let file = File::open(path).map_err(|e| read_err(path, e))?;
    csv::Reader::from_reader(file)
        .records()
        .map(|r| r.map_err(|e| read_err(path, e)))
        .collect()
}

fn field<'a>(path: &Path, r: &'a csv::StringRecord, i: usize) -> Result<&'a str, CliError> {
    r.get(i)
        .ok_or_else(|| read_err(path, format!("missing column {i}")))
}

fn num<T: std::str::FromStr>(path: &Path, r: &csv::StringRecord, i: usize) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    field(path, r, i)?.parse().map_err(|e| read_err(path, e))
}

fn date(path: &Path, r: &csv::StringRecord, i: usize) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(field(path, r, i)?, "%Y-%m-%d").map_err(|e| read_err(path, e))
}

fn series_rows<'a>(
    s: &'a ReturnSeries,
    kind: Option<&str>,
) -> impl Iterator<Item = Vec<String>> + 'a {
    let kind = kind.map(str::to_string);
    s.dates().iter().zip(s.values()).map(move |(d, v)| {
        let mut row = vec![s.stock_id().to_string()];
        row.extend(kind.clone());
        row.push(d.to_string());
        row.push(v.to_string());
        row
    })
}

pub fn write_returns(dir: &Path, stocks: &[StockReturns]) -> Result<(), CliError> {
    write_rows(
        &dir.join(RETURNS),
        &["stock_id", "kind", "date", "value"],
        stocks.iter().flat_map(|s| {
            series_rows(&s.raw, Some("raw")).chain(series_rows(&s.excess, Some("excess")))
        }),
    )?;
    write_rows(
        &dir.join(EXCESS_STOCKS),
        &["stock_id", "n_raw", "n_excess", "gaps", "skipped_quarters"],
        stocks.iter().map(|s| {
            vec![
                s.stock_id.clone(),
                s.raw.len().to_string(),
                s.excess.len().to_string(),
                s.gaps.to_string(),
                s.skipped_quarters.to_string(),
            ]
        }),
    )
}

type Columns = (Vec<NaiveDate>, Vec<f64>);

fn build_series(id: &str, kind: ReturnKind, cols: Columns) -> Result<ReturnSeries, CliError> {
    ReturnSeries::new(id, kind, cols.0, cols.1).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn read_returns(dir: &Path) -> Result<Vec<StockReturns>, CliError> {
    let path = require(dir, RETURNS, "excess")?;
    let meta_path = require(dir, EXCESS_STOCKS, "excess")?;
    let mut raw: BTreeMap<String, Columns> = BTreeMap::new();
    let mut excess: BTreeMap<String, Columns> = BTreeMap::new();
    for r in read_rows(&path)? {
        let id = field(&path, &r, 0)?.to_string();
        let target = match field(&path, &r, 1)? {
            "raw" => &mut raw,
            "excess" => &mut excess,
            other => return Err(read_err(&path, format!("unknown kind `{other}`"))),
        };
        let e = target.entry(id).or_default();
        e.0.push(date(&path, &r, 2)?);
        e.1.push(num(&path, &r, 3)?);
    }
    let mut out = Vec::new();
    for r in read_rows(&meta_path)? {
        let id = field(&meta_path, &r, 0)?.to_string();
        out.push(StockReturns {
            raw: build_series(&id, ReturnKind::Raw, raw.remove(&id).unwrap_or_default())?,
            excess: build_series(
                &id,
                ReturnKind::Excess,
                excess.remove(&id).unwrap_or_default(),
            )?,
            gaps: num(&meta_path, &r, 3)?,
            skipped_quarters: num(&meta_path, &r, 4)?,
            stock_id: id,
        });
    }
    out.sort_by(|a, b| a.stock_id.cmp(&b.stock_id));
    Ok(out)
}

pub fn write_egarch(dir: &Path, stocks: &[StockVolatility]) -> Result<(), CliError> {
    write_rows(
        &dir.join(EGARCH_FITS),
        &[
            "stock_id",
            "kappa",
            "gamma1",
            "eta1",
            "xi1",
            "loglik",
            "converged",
        ],
        stocks.iter().map(|s| {
            vec![
                s.stock_id.clone(),
                s.params.kappa.to_string(),
                s.params.gamma1.to_string(),
                s.params.eta1.to_string(),
                s.params.xi1.to_string(),
                s.loglik.to_string(),
                s.converged.to_string(),
            ]
        }),
    )?;
    write_rows(
        &dir.join(NORMALIZED),
        &["stock_id", "date", "value"],
        stocks.iter().flat_map(|s| series_rows(&s.normalized, None)),
    )
}

pub fn read_egarch(dir: &Path) -> Result<Vec<StockVolatility>, CliError> {
    let fits_path = require(dir, EGARCH_FITS, "egarch")?;
    let norm_path = require(dir, NORMALIZED, "egarch")?;
    let mut norm: BTreeMap<String, Columns> = BTreeMap::new();
    for r in read_rows(&norm_path)? {
        let e = norm
            .entry(field(&norm_path, &r, 0)?.to_string())
            .or_default();
        e.0.push(date(&norm_path, &r, 1)?);
        e.1.push(num(&norm_path, &r, 2)?);
    }
    let mut out = Vec::new();
    for r in read_rows(&fits_path)? {
        let id = field(&fits_path, &r, 0)?.to_string();
        let p = &fits_path;
        out.push(StockVolatility {
            params: EgarchParams {
                kappa: num(p, &r, 1)?,
                gamma1: num(p, &r, 2)?,
                eta1: num(p, &r, 3)?,
                xi1: num(p, &r, 4)?,
            },
            loglik: num(p, &r, 5)?,
            converged: num(p, &r, 6)?,
            normalized: build_series(
                &id,
                ReturnKind::Normalized,
                norm.remove(&id).unwrap_or_default(),
            )?,
            stock_id: id,
        });
    }
    out.sort_by(|a, b| a.stock_id.cmp(&b.stock_id));
    Ok(out)
}
