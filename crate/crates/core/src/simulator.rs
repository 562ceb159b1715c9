//! Synthetic markets with known factor loadings, EGARCH volatility regimes and
//! a scripted short-sale list schedule.
//!
//! Random streams come from `ChaCha8Rng` seeded with `seed_from_u64(seed)`;
//! stream 0 drives the factors, stream `i + 1` drives stock `i` and stream
//! `n_stocks + 1` the industry assignment, so every stock can be generated
//! independently and in parallel.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::egarch::EgarchParams;
use crate::error::{Error, Result};
use crate::events::ShortSaleEvent;
use crate::market_data::{
    Dataset, FactorSeries, PriceSeries, StockMeta, TradingCalendar, TurnoverSeries,
};

pub const GENERATOR_ID: &str =
    "rand_chacha::ChaCha8Rng(seed_from_u64, per-stock set_stream) + rand_distr::StandardNormal";

/// Steps discarded before the first recorded observation.
pub const BURN_IN: usize = 250;

/// Standardized shock distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Innovation {
    Gaussian,
    /// Two-piece normal with right/left scales `1 + skew` and `1 - skew`,
    /// shifted and scaled to zero mean and unit variance. `skew > 0` gives a
    /// heavier right tail.
    TwoPiece {
        skew: f64,
    },
}

impl Innovation {
    pub fn from_skew(skew: f64) -> Self {
        if skew == 0.0 {
            Innovation::Gaussian
        } else {
            Innovation::TwoPiece { skew }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        match *self {
            Innovation::Gaussian => z,
            Innovation::TwoPiece { skew } => {
                let (right, left) = (1.0 + skew, 1.0 - skew);
                let x = if z >= 0.0 { z * right } else { z * left };
                let mean = (right - left) / (2.0 * PI).sqrt();
                let var = 0.5 * (right * right + left * left) - mean * mean;
                (x - mean) / var.sqrt()
            }
        }
    }

    /// Theoretical skewness of the standardized shock.
    pub fn skewness(&self) -> f64 {
        match *self {
            Innovation::Gaussian => 0.0,
            Innovation::TwoPiece { skew } => {
                let (a, b) = (1.0 + skew, 1.0 - skew);
                let c = (2.0 / PI).sqrt();
                // Raw moments of the unshifted two-piece variable.
                let m1 = 0.5 * c * (a - b);
                let m2 = 0.5 * (a * a + b * b);
                let m3 = c * (a.powi(3) - b.powi(3));
                let var = m2 - m1 * m1;
                (m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3)) / var.powf(1.5)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Innovation::TwoPiece { skew } if !(skew.abs() < 1.0) => Err(Error::Config(format!(
                "two-piece skew {skew} must lie in (-1, 1)"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub eps: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Gaussian EGARCH(1,1) innovations `eps[t] = sigma[t] * z[t]`.
pub fn egarch_simulate(params: &EgarchParams, n: usize, seed: u64) -> Result<SimulatedPath> {
    egarch_simulate_with(params, n, seed, Innovation::Gaussian)
}

pub fn egarch_simulate_with(
    params: &EgarchParams,
    n: usize,
    seed: u64,
    innovation: Innovation,
) -> Result<SimulatedPath> {
    params.validate()?;
    innovation.validate()?;
    if n == 0 {
        return Err(Error::Domain("path length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = VolState::new(params);
    for _ in 0..BURN_IN {
        state.step(params, innovation, &mut rng);
    }
    let mut eps = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for _ in 0..n {
        let (e, s) = state.step(params, innovation, &mut rng);
        eps.push(e);
        sigma.push(s);
    }
    Ok(SimulatedPath { eps, sigma })
}

struct VolState {
    log_var: f64,
    z: f64,
}

impl VolState {
    fn new(params: &EgarchParams) -> Self {
        Self {
            log_var: params.unconditional_log_variance(),
            z: 0.0,
        }
    }

    fn step<R: Rng + ?Sized>(
        &mut self,
        params: &EgarchParams,
        innovation: Innovation,
        rng: &mut R,
    ) -> (f64, f64) {
        self.log_var = params.next_log_variance(self.log_var, self.z);
        let sigma = (0.5 * self.log_var).exp();
        self.z = innovation.sample(rng);
        (sigma * self.z, sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorProcess {
    pub mean: f64,
    pub vol: f64,
}

/// Volatility dynamics and shock shape in force while a stock is in a regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub egarch: EgarchParams,
    pub innovation: Innovation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ListEntry {
    /// Index into the simulated universe.
    pub stock: usize,
    /// Day index (0-based) of addition.
    pub add_day: usize,
    pub delete_day: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_stocks: usize,
    pub n_days: usize,
    /// Calendar is the weekdays from this date on.
    pub start_date: NaiveDate,
    /// Market, size and value factors.
    pub factors: [FactorProcess; 3],
    pub alpha_range: (f64, f64),
    pub beta_ranges: [(f64, f64); 3],
    /// Scale on idiosyncratic innovations; 0 gives pure factor returns.
    pub idio_scale: f64,
    /// Regime for stocks while off the list.
    pub base_regime: Regime,
    /// Regime for stocks while on the list; `None` keeps the base regime.
    pub listed_regime: Option<Regime>,
    pub list_schedule: Vec<ListEntry>,
    pub turnover_log_mean: f64,
    pub turnover_log_sd: f64,
    pub n_industries: usize,
    pub initial_price: f64,
    pub seed: u64,
}

fn weekdays_from(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(n)
        .collect()
}

/// Number of weekdays in `[start, end]`.
pub fn weekday_count(start: NaiveDate, end: NaiveDate) -> usize {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .count()
}

/// Typical idiosyncratic EGARCH dynamics: 2% daily volatility, persistence
/// 0.95.
pub fn typical_egarch(xi1: f64) -> EgarchParams {
    let log_var = (0.02f64 * 0.02).ln();
    let gamma1 = 0.95;
    EgarchParams {
        kappa: log_var * (1.0 - gamma1),
        gamma1,
        eta1: 0.15,
        xi1,
    }
}

/// Effective dates of the large list expansions, used to stagger additions.
pub const EXPANSION_DATES: [(i32, u32, u32); 4] =
    [(2010, 3, 31), (2011, 12, 5), (2013, 1, 31), (2013, 9, 16)];

impl SimConfig {
    fn base(seed: u64, n_stocks: usize) -> Self {
        let start = NaiveDate::from_ymd_opt(2002, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2014, 3, 31).unwrap();
        Self {
            n_stocks,
            n_days: weekday_count(start, end),
            start_date: start,
            factors: [
                FactorProcess {
                    mean: 0.0003,
                    vol: 0.015,
                },
                FactorProcess {
                    mean: 0.0001,
                    vol: 0.006,
                },
                FactorProcess {
                    mean: 0.0001,
                    vol: 0.005,
                },
            ],
            alpha_range: (-0.0002, 0.0002),
            beta_ranges: [(0.6, 1.4), (-0.5, 0.8), (-0.5, 0.5)],
            idio_scale: 1.0,
            base_regime: Regime {
                egarch: typical_egarch(0.0),
                innovation: Innovation::Gaussian,
            },
            listed_regime: None,
            list_schedule: Vec::new(),
            turnover_log_mean: (0.02f64).ln(),
            turnover_log_sd: 0.5,
            n_industries: 13,
            initial_price: 10.0,
            seed,
        }
    }

    /// Symmetric market: no leverage term, Gaussian shocks, no list.
    pub fn null_market(seed: u64, n_stocks: usize) -> Self {
        Self::base(seed, n_stocks)
    }

    /// Half of the universe (even indices) joins the list at one of the four
    /// expansion dates and switches to symmetric, leverage-free dynamics; the
    /// rest keep anti-leverage dynamics with right-skewed shocks throughout.
    pub fn regime_experiment(seed: u64, n_stocks: usize) -> Self {
        let mut cfg = Self::base(seed, n_stocks);
        cfg.base_regime = Regime {
            egarch: typical_egarch(0.1),
            innovation: Innovation::TwoPiece { skew: 0.25 },
        };
        cfg.listed_regime = Some(Regime {
            egarch: typical_egarch(0.0),
            innovation: Innovation::Gaussian,
        });
        let calendar = weekdays_from(cfg.start_date, cfg.n_days);
        let day_of = |(y, m, d): (i32, u32, u32)| {
            let date = NaiveDate::from_ymd_opt(y, m, d).unwrap();
            calendar.partition_point(|c| *c < date)
        };
        cfg.list_schedule = (0..n_stocks)
            .step_by(2)
            .enumerate()
            .map(|(k, stock)| ListEntry {
                stock,
                add_day: day_of(EXPANSION_DATES[k % EXPANSION_DATES.len()]),
                delete_day: None,
            })
            .collect();
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_stocks == 0 || self.n_days < 2 {
            return Err(Error::Config("need at least one stock and two days".into()));
        }
        if self.n_industries == 0 {
            return Err(Error::Config("n_industries must be positive".into()));
        }
        if self.factors.iter().any(|f| !(f.vol > 0.0)) {
            return Err(Error::Config("factor volatilities must be positive".into()));
        }
        if !(self.turnover_log_sd >= 0.0)
            || !(self.initial_price > 0.0)
            || !(self.idio_scale >= 0.0)
        {
            return Err(Error::Config(
                "turnover sd, idio scale and initial price must be non-negative / positive".into(),
            ));
        }
        for r in std::iter::once(&self.base_regime).chain(self.listed_regime.as_ref()) {
            r.egarch
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
            r.innovation.validate()?;
        }
        let mut seen = vec![false; self.n_stocks];
        for e in &self.list_schedule {
            if e.stock >= self.n_stocks {
                return Err(Error::Config(format!(
                    "list schedule references unknown stock index {}",
                    e.stock
                )));
            }
            if std::mem::replace(&mut seen[e.stock], true) {
                return Err(Error::Config(format!(
                    "stock index {} scheduled more than once",
                    e.stock
                )));
            }
            if e.add_day >= self.n_days
                || e.delete_day
                    .is_some_and(|d| d <= e.add_day || d >= self.n_days)
            {
                return Err(Error::Config(format!(
                    "schedule for stock {} outside [0, {})",
                    e.stock, self.n_days
                )));
            }
        }
        Ok(())
    }
}

pub fn stock_id(index: usize) -> String {
    format!("S{:04}", index + 1)
}

pub fn industry_code(index: usize) -> String {
    format!("I{:02}", index + 1)
}

/// Known parameters for one simulated stock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub stock_id: String,
    pub industry_code: String,
    pub alpha: f64,
    pub betas: [f64; 3],
    pub base: Regime,
    pub listed: Option<Regime>,
    pub add_date: Option<NaiveDate>,
    pub delete_date: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimManifest {
    pub generator: String,
    pub crate_version: String,
    pub config: SimConfig,
}

#[derive(Debug, Clone)]
pub struct SimulatedMarket {
    pub dataset: Dataset,
    pub truth: Vec<GroundTruth>,
    pub manifest: SimManifest,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct StockPath {
    prices: Vec<(NaiveDate, f64)>,
    turnover: Vec<(NaiveDate, f64)>,
    alpha: f64,
    betas: [f64; 3],
}

fn simulate_stock(
    cfg: &SimConfig,
    index: usize,
    calendar: &[NaiveDate],
    factors: &[[f64; 3]],
    schedule: Option<&ListEntry>,
) -> StockPath {
    let mut rng = stream_rng(cfg.seed, index as u64 + 1);
    let alpha = rng.random_range(cfg.alpha_range.0..=cfg.alpha_range.1);
    let betas = cfg.beta_ranges.map(|(lo, hi)| rng.random_range(lo..=hi));

    let listed_on =
        |t: usize| schedule.is_some_and(|e| t >= e.add_day && e.delete_day.is_none_or(|d| t < d));
    let regime_at = |t: usize| match (&cfg.listed_regime, listed_on(t)) {
        (Some(r), true) => r,
        _ => &cfg.base_regime,
    };

    let mut state = VolState::new(&cfg.base_regime.egarch);
    for _ in 0..BURN_IN {
        state.step(
            &cfg.base_regime.egarch,
            cfg.base_regime.innovation,
            &mut rng,
        );
    }

    let mut price = cfg.initial_price;
    let mut prices = Vec::with_capacity(calendar.len());
    let mut turnover = Vec::with_capacity(calendar.len());
    for (t, date) in calendar.iter().enumerate() {
        let regime = regime_at(t);
        let (eps, _) = state.step(&regime.egarch, regime.innovation, &mut rng);
        let z: f64 = rng.sample(StandardNormal);
        if t > 0 {
            let f = &factors[t];
            let r =
                alpha + betas[0] * f[0] + betas[1] * f[1] + betas[2] * f[2] + cfg.idio_scale * eps;
            price *= r.exp();
        }
        prices.push((*date, price));
        turnover.push((
            *date,
            (cfg.turnover_log_mean + cfg.turnover_log_sd * z).exp(),
        ));
    }
    StockPath {
        prices,
        turnover,
        alpha,
        betas,
    }
}

/// Generates a full dataset plus the ground truth used to score recovery.
pub fn simulate_market(cfg: &SimConfig) -> Result<SimulatedMarket> {
    cfg.validate()?;
    let dates = weekdays_from(cfg.start_date, cfg.n_days);
    let calendar = TradingCalendar::new(dates.clone())?;

    let mut frng = stream_rng(cfg.seed, 0);
    let factor_values: Vec<[f64; 3]> = dates
        .iter()
        .map(|_| {
            cfg.factors.map(|p| {
                let z: f64 = frng.sample(StandardNormal);
                p.mean + p.vol * z
            })
        })
        .collect();

    let mut mrng = stream_rng(cfg.seed, cfg.n_stocks as u64 + 1);
    let industries: Vec<usize> = (0..cfg.n_stocks)
        .map(|_| mrng.random_range(0..cfg.n_industries))
        .collect();

    let schedule: BTreeMap<usize, &ListEntry> =
        cfg.list_schedule.iter().map(|e| (e.stock, e)).collect();

    let paths: Vec<StockPath> = (0..cfg.n_stocks)
        .into_par_iter()
        .map(|i| simulate_stock(cfg, i, &dates, &factor_values, schedule.get(&i).copied()))
        .collect();

    let mut prices = BTreeMap::new();
    let mut turnover = BTreeMap::new();
    let mut meta = BTreeMap::new();
    let mut truth = Vec::with_capacity(cfg.n_stocks);
    for (i, path) in paths.into_iter().enumerate() {
        let id = stock_id(i);
        let entry = schedule.get(&i);
        truth.push(GroundTruth {
            stock_id: id.clone(),
            industry_code: industry_code(industries[i]),
            alpha: path.alpha,
            betas: path.betas,
            base: cfg.base_regime,
            listed: entry.and(cfg.listed_regime),
            add_date: entry.map(|e| dates[e.add_day]),
            delete_date: entry.and_then(|e| e.delete_day.map(|d| dates[d])),
        });
        meta.insert(
            id.clone(),
            StockMeta {
                stock_id: id.clone(),
                industry_code: industry_code(industries[i]),
                listing_date: path.prices.first().map(|p| p.0),
            },
        );
        prices.insert(id.clone(), PriceSeries::new(id.clone(), path.prices)?);
        turnover.insert(id.clone(), TurnoverSeries::new(id, path.turnover)?);
    }

    let mut events: Vec<ShortSaleEvent> = cfg
        .list_schedule
        .iter()
        .flat_map(|e| {
            let id = stock_id(e.stock);
            std::iter::once(ShortSaleEvent::add(dates[e.add_day], id.clone()))
                .chain(e.delete_day.map(|d| ShortSaleEvent::delete(dates[d], id)))
        })
        .collect();
    events.sort_by(|a, b| {
        (a.effective_date, a.action, &a.stock_id).cmp(&(b.effective_date, b.action, &b.stock_id))
    });

    let dataset = Dataset {
        calendar,
        prices,
        factors: FactorSeries::new(dates, factor_values)?,
        turnover,
        meta,
        events,
        diagnostics: Vec::new(),
    };
    Ok(SimulatedMarket {
        dataset,
        truth,
        manifest: SimManifest {
            generator: GENERATOR_ID.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            config: cfg.clone(),
        },
    })
}

pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes the input CSVs, `ground_truth.csv` and `manifest.json`.
pub fn write_market(market: &SimulatedMarket, dir: &Path) -> Result<()> {
    market.dataset.write_csv_dir(dir)?;
    let io = |e: &dyn std::fmt::Display, f: &str| Error::Io {
        file: f.into(),
        message: e.to_string(),
    };
    let path = dir.join(GROUND_TRUTH_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io(&e, GROUND_TRUTH_FILE))?;
    w.write_record([
        "stock_id",
        "industry_code",
        "alpha",
        "beta_mkt",
        "beta_smb",
        "beta_hml",
        "base_kappa",
        "base_gamma1",
        "base_eta1",
        "base_xi1",
        "base_skew",
        "listed_kappa",
        "listed_gamma1",
        "listed_eta1",
        "listed_xi1",
        "listed_skew",
        "add_date",
        "delete_date",
    ])
    .map_err(|e| io(&e, GROUND_TRUTH_FILE))?;
    let skew = |i: &Innovation| match i {
        Innovation::Gaussian => 0.0,
        Innovation::TwoPiece { skew } => *skew,
    };
    for g in &market.truth {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let l = g.listed.as_ref();
        w.write_record([
            g.stock_id.clone(),
            g.industry_code.clone(),
            g.alpha.to_string(),
            g.betas[0].to_string(),
            g.betas[1].to_string(),
            g.betas[2].to_string(),
            g.base.egarch.kappa.to_string(),
            g.base.egarch.gamma1.to_string(),
            g.base.egarch.eta1.to_string(),
            g.base.egarch.xi1.to_string(),
            skew(&g.base.innovation).to_string(),
            opt(l.map(|r| r.egarch.kappa)),
            opt(l.map(|r| r.egarch.gamma1)),
            opt(l.map(|r| r.egarch.eta1)),
            opt(l.map(|r| r.egarch.xi1)),
            opt(l.map(|r| skew(&r.innovation))),
            g.add_date.map(|d| d.to_string()).unwrap_or_default(),
            g.delete_date.map(|d| d.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| io(&e, GROUND_TRUTH_FILE))?;
    }
    w.flush().map_err(|e| io(&e, GROUND_TRUTH_FILE))?;
    let json = serde_json::to_string_pretty(&market.manifest).expect("manifest serializes");
    std::fs::write(dir.join(MANIFEST_FILE), json + "\n").map_err(|e| io(&e, MANIFEST_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, sample_variance};

    #[test]
    fn degenerate_egarch_is_iid_with_variance_exp_kappa() {
        let p = EgarchParams::new(-8.0, 0.0, 0.0, 0.0).unwrap();
        let path = egarch_simulate(&p, 20_000, 7).unwrap();
        assert!(path
            .sigma
            .iter()
            .all(|s| (s - (-4.0f64).exp()).abs() < 1e-15));
        let v = sample_variance(&path.eps);
        assert!((v / (-8.0f64).exp() - 1.0).abs() < 0.05);
    }

    #[test]
    fn same_seed_same_path() {
        let p = typical_egarch(0.1);
        let a = egarch_simulate(&p, 500, 42).unwrap();
        let b = egarch_simulate(&p, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, egarch_simulate(&p, 500, 43).unwrap());
    }

    #[test]
    fn two_piece_is_standardized() {
        let inn = Innovation::TwoPiece { skew: 0.25 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..200_000).map(|_| inn.sample(&mut rng)).collect();
        assert!(mean(&x).abs() < 0.01);
        assert!((sample_variance(&x) - 1.0).abs() < 0.02);
        let s = crate::stats::skewness(&x).unwrap();
        assert!(
            (s - inn.skewness()).abs() < 0.03,
            "{s} vs {}",
            inn.skewness()
        );
        assert!(inn.skewness() > 0.0);
    }

    #[test]
    fn schedule_must_reference_known_stocks() {
        let mut cfg = SimConfig::null_market(1, 3);
        cfg.list_schedule.push(ListEntry {
            stock: 5,
            add_day: 10,
            delete_day: None,
        });
        assert!(matches!(simulate_market(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn study_calendar() {
        let cfg = SimConfig::regime_experiment(1, 10);
        assert_eq!(cfg.list_schedule.len(), 5);
        let dates = weekdays_from(cfg.start_date, cfg.n_days);
        assert_eq!(
            *dates.last().unwrap(),
            NaiveDate::from_ymd_opt(2014, 3, 31).unwrap()
        );
        assert_eq!(
            dates[cfg.list_schedule[0].add_day],
            NaiveDate::from_ymd_opt(2010, 3, 31).unwrap()
        );
    }
}
