//! Plain-text `key = value` run configuration.

use std::path::{Path, PathBuf};

use asymmetry_core::market_data::ReturnMethod;
use asymmetry_core::panel::StdErrorKind;
use asymmetry_core::windows::Windowing;
use chrono::NaiveDate;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Symmetric market without a designated list.
    Null,
    /// Staggered list additions that switch dynamics.
    Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub windowing: Windowing,
    pub min_excess_obs: usize,
    pub min_panel_obs: usize,
    pub return_method: ReturnMethod,
    pub as_of: NaiveDate,
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
    pub window_years: u32,
    pub min_window_obs: usize,
    pub window_max_evals: usize,
    pub std_errors: StdErrorKind,
    pub bins: usize,
    pub threads: usize,
    pub seed: u64,
    pub n_stocks: usize,
    pub scenario: Scenario,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
        Self {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            windowing: Windowing::Quarter,
            min_excess_obs: 60,
            min_panel_obs: 40,
            return_method: ReturnMethod::Log,
            as_of: d(2014, 3, 31),
            period_start: d(2006, 1, 1),
            period_end: d(2014, 3, 31),
            window_years: 4,
            min_window_obs: 200,
            window_max_evals: 20_000,
            std_errors: StdErrorKind::Classical,
            bins: 60,
            threads: 0,
            seed: 1,
            n_stocks: 200,
            scenario: Scenario::Regime,
        }
    }
}

pub const KEYS: [&str; 18] = [
    "data_dir",
    "out_dir",
    "windowing",
    "min_excess_obs",
    "min_panel_obs",
    "return_method",
    "as_of",
    "period_start",
    "period_end",
    "window_years",
    "min_window_obs",
    "window_max_evals",
    "std_errors",
    "bins",
    "threads",
    "seed",
    "n_stocks",
    "scenario",
];

fn invalid(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!(
        "config key `{key}`: invalid value `{value}` ({why})"
    ))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| invalid(key, value, e))
}

fn parse_date(key: &str, value: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d").map_err(|e| invalid(key, value, e))
}

impl RunConfig {
    /// Applies one setting; unknown keys are rejected by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim() {
            "data_dir" => self.data_dir = PathBuf::from(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "windowing" => self.windowing = value.parse().map_err(|e| invalid(key, value, e))?,
            "min_excess_obs" => self.min_excess_obs = parse_num(key, value)?,
            "min_panel_obs" => self.min_panel_obs = parse_num(key, value)?,
            "return_method" => {
                self.return_method = value.parse().map_err(|e| invalid(key, value, e))?
            }
            "as_of" => self.as_of = parse_date(key, value)?,
            "period_start" => self.period_start = parse_date(key, value)?,
            "period_end" => self.period_end = parse_date(key, value)?,
            "window_years" => self.window_years = parse_num(key, value)?,
            "min_window_obs" => self.min_window_obs = parse_num(key, value)?,
            "window_max_evals" => self.window_max_evals = parse_num(key, value)?,
            "std_errors" => {
                self.std_errors = match value {
                    "classical" => StdErrorKind::Classical,
                    "clustered" => StdErrorKind::Clustered,
                    _ => return Err(invalid(key, value, "expected classical or clustered")),
                }
            }
            "bins" => self.bins = parse_num(key, value)?,
            "threads" => self.threads = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "n_stocks" => self.n_stocks = parse_num(key, value)?,
            "scenario" => {
                self.scenario = match value {
                    "null" => Scenario::Null,
                    "regime" => Scenario::Regime,
                    _ => return Err(invalid(key, value, "expected null or regime")),
                }
            }
            other => {
                return Err(CliError::Validation(format!(
                    "unknown config key `{other}`"
                )));
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!("config line {}: expected `key = value`", i + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("min_excess_obs", self.min_excess_obs),
            ("min_panel_obs", self.min_panel_obs),
            ("window_years", self.window_years as usize),
            ("min_window_obs", self.min_window_obs),
            ("window_max_evals", self.window_max_evals),
            ("bins", self.bins),
            ("n_stocks", self.n_stocks),
        ];
        for (k, v) in positive {
            if v == 0 {
                return Err(CliError::Validation(format!(
                    "config key `{k}` must be positive"
                )));
            }
        }
        if self.period_start > self.period_end {
            return Err(CliError::Validation(
                "period_start is after period_end".into(),
            ));
        }
        Ok(())
    }
}
