use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use asymmetry_core::egarch::FitOptions;
use asymmetry_core::events::{replay_events, Group};
use asymmetry_core::factor_model::RollingConfig;
use asymmetry_core::figures::{
    before_after_test, interval_curves, pooled_distribution, split_dates, IntervalPoint,
    IntervalStatistic, SplitSeries, INTERVALS,
};
use asymmetry_core::market_data::{
    ingest_dataset, Dataset, DatasetFiles, IngestOptions, PRICES_FILE,
};
use asymmetry_core::panel::{
    build_samples, fe_ols, report_table, Dependent, PanelConfig, StockPanelInput,
};
use asymmetry_core::pipeline::{
    all_stock_statistics, egarch_stage, excess_stage, format_summary_table, summary_table,
    AnalysisConfig, StockDrop,
};
use asymmetry_core::simulator::{simulate_market, write_market, SimConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::artifacts::{self as art, require};
use crate::config::{RunConfig, Scenario};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Simulate,
    Excess,
    Egarch,
    Stats,
    Panel,
    Figures,
    All,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Excess => "excess",
            Stage::Egarch => "egarch",
            Stage::Stats => "stats",
            Stage::Panel => "panel",
            Stage::Figures => "figures",
            Stage::All => "all",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        [
            Stage::Simulate,
            Stage::Excess,
            Stage::Egarch,
            Stage::Stats,
            Stage::Panel,
            Stage::Figures,
            Stage::All,
        ]
        .into_iter()
        .find(|st| st.name() == s)
        .ok_or_else(|| CliError::Validation(format!("unknown stage `{s}`")))
    }
}

/// What a stage reports to the run manifest.
#[derive(Debug, Default)]
struct Report {
    kept: usize,
    dropped: Vec<StockDrop>,
    extra: Value,
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct StageRecord {
    finished_unix: u64,
    seconds: f64,
    kept: usize,
    dropped: usize,
    drop_reasons: BTreeMap<String, usize>,
    details: Value,
}

fn record_stage(
    cfg: &RunConfig,
    stage: Stage,
    seconds: f64,
    report: &Report,
) -> Result<(), CliError> {
    let path = cfg.out_dir.join(art::RUN_MANIFEST);
    let mut manifest: BTreeMap<String, Value> = std::fs::read_to_string(&path)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default();
    let mut reasons = BTreeMap::new();
    for d in &report.dropped {
        let key = format!("{}: {}", d.stage, d.reason.split(',').next().unwrap_or(""));
        *reasons.entry(key).or_insert(0) += 1;
    }
    let rec = StageRecord {
        finished_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        seconds,
        kept: report.kept,
        dropped: report.dropped.len(),
        drop_reasons: reasons,
        details: report.extra.clone(),
    };
    manifest.insert(
        stage.name().to_string(),
        serde_json::to_value(rec).expect("record serializes"),
    );
    manifest.insert(
        "config".into(),
        serde_json::to_value(cfg).expect("config serializes"),
    );
    art::write_json(&path, &manifest)
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset, CliError> {
    require(&cfg.data_dir, PRICES_FILE, "simulate")?;
    Ok(ingest_dataset(
        &DatasetFiles::in_dir(&cfg.data_dir),
        &IngestOptions::default(),
    )?)
}

fn analysis_config(cfg: &RunConfig) -> AnalysisConfig {
    AnalysisConfig {
        return_method: cfg.return_method,
        rolling: RollingConfig {
            window_years: cfg.window_years,
            min_obs: cfg.min_window_obs,
            first_quarter: None,
        },
        min_excess_obs: cfg.min_excess_obs,
        period_start: cfg.period_start,
        period_end: cfg.period_end,
    }
}

fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let sim = match cfg.scenario {
        Scenario::Null => SimConfig::null_market(cfg.seed, cfg.n_stocks),
        Scenario::Regime => SimConfig::regime_experiment(cfg.seed, cfg.n_stocks),
    };
    let market = simulate_market(&sim)?;
    write_market(&market, &cfg.data_dir)?;
    Ok(Report {
        kept: market.truth.len(),
        extra: json!({ "data_dir": cfg.data_dir, "days": market.dataset.calendar.len() }),
        ..Report::default()
    })
}

fn excess(cfg: &RunConfig) -> Result<Report, CliError> {
    let dataset = load_dataset(cfg)?;
    let stage = excess_stage(&dataset, &analysis_config(cfg));
    art::write_returns(&cfg.out_dir, &stage.stocks)?;
    Ok(Report {
        kept: stage.stocks.len(),
        dropped: stage.dropped,
        extra: json!({ "rejected_rows": dataset.diagnostics.len() }),
    })
}

fn egarch(cfg: &RunConfig) -> Result<Report, CliError> {
    let returns = art::read_returns(&cfg.out_dir)?;
    let stage = egarch_stage(&returns, &FitOptions::default());
    art::write_egarch(&cfg.out_dir, &stage.stocks)?;
    Ok(Report {
        kept: stage.stocks.len(),
        dropped: stage.dropped,
        extra: Value::Null,
    })
}

fn stats(cfg: &RunConfig) -> Result<Report, CliError> {
    let returns = art::read_returns(&cfg.out_dir)?;
    let vols = art::read_egarch(&cfg.out_dir)?;
    let (stats, dropped) = all_stock_statistics(&returns, &vols);
    let table = summary_table(&stats)?;
    art::write_records(
        &cfg.out_dir.join(art::PER_STOCK_STATS),
        &stats,
        &["stock_id"],
    )?;
    art::write_json(&cfg.out_dir.join(art::SUMMARY_JSON), &table)?;
    art::write_text(
        &cfg.out_dir.join(art::SUMMARY_TXT),
        &format_summary_table(&table),
    )?;
    Ok(Report {
        kept: stats.len(),
        dropped,
        extra: Value::Null,
    })
}

fn panel(cfg: &RunConfig) -> Result<Report, CliError> {
    let dataset = load_dataset(cfg)?;
    let returns = art::read_returns(&cfg.out_dir)?;
    let vols = art::read_egarch(&cfg.out_dir)?;
    let timeline = replay_events(&dataset.events)?;

    let mut inputs = Vec::new();
    for v in &vols {
        let Ok(i) = returns.binary_search_by(|r| r.stock_id.cmp(&v.stock_id)) else {
            continue;
        };
        let meta = dataset.meta.get(&v.stock_id).ok_or_else(|| {
            CliError::Validation(format!("stock {} has no metadata row", v.stock_id))
        })?;
        inputs.push(StockPanelInput {
            stock_id: &v.stock_id,
            industry_code: &meta.industry_code,
            raw: &returns[i].raw,
            excess: &returns[i].excess,
            normalized: &v.normalized,
            full_fit: v.params,
            turnover: dataset.turnover.get(&v.stock_id),
        });
    }
    let pcfg = PanelConfig {
        windowing: cfg.windowing,
        min_obs: cfg.min_panel_obs,
        period_start: cfg.period_start,
        period_end: cfg.period_end,
        as_of: cfg.as_of,
        window_max_evals: cfg.window_max_evals,
    };
    let build = build_samples(&inputs, &timeline, &dataset.calendar, &pcfg);
    for w in &build.empty_windows {
        eprintln!("warning: window {w} has no qualifying stock");
    }
    let fits = Dependent::ALL
        .iter()
        .map(|d| fe_ols(&build.samples, *d, cfg.std_errors))
        .collect::<Result<Vec<_>, _>>()?;

    let w = cfg.windowing.to_string();
    art::write_records(
        &cfg.out_dir.join(art::panel_samples(&w)),
        &build.samples,
        &["stock_id"],
    )?;
    art::write_records(
        &cfg.out_dir.join(art::panel_exclusions(&w)),
        &build.excluded,
        &["stock_id", "window", "reason", "detail"],
    )?;
    art::write_json(
        &cfg.out_dir.join(art::panel_fits(&w)),
        &json!({
            "windowing": w,
            "n_windows": build.windows.len(),
            "windows": build.windows,
            "empty_windows": build.empty_windows,
            "exclusions": build.exclusion_counts(),
            "fits": fits,
        }),
    )?;
    art::write_text(
        &cfg.out_dir.join(art::panel_table(&w)),
        &report_table(&fits),
    )?;
    Ok(Report {
        kept: build.samples.len(),
        extra: json!({
            "windowing": w,
            "n_windows": build.windows.len(),
            "time_levels": fits.first().map(|f| f.time_levels),
            "excluded_samples": build.exclusion_counts(),
        }),
        ..Report::default()
    })
}

fn write_curve(path: &Path, points: &[IntervalPoint]) -> Result<(), CliError> {
    art::write_rows(
        path,
        &[
            "group",
            "phase",
            "interval",
            "mean",
            "std_error",
            "n_stocks",
        ],
        points.iter().map(|p| {
            vec![
                p.group.label().to_string(),
                p.phase.label().to_string(),
                p.interval.to_string(),
                p.mean.to_string(),
                p.std_error.to_string(),
                p.n_stocks.to_string(),
            ]
        }),
    )
}

fn figures(cfg: &RunConfig) -> Result<Report, CliError> {
    let dataset = load_dataset(cfg)?;
    let returns = art::read_returns(&cfg.out_dir)?;
    let vols = art::read_egarch(&cfg.out_dir)?;
    let out = &cfg.out_dir;

    let dist = pooled_distribution(vols.iter().map(|v| &v.normalized), cfg.bins)?;
    let pair = |v: &[(f64, f64)]| {
        v.iter()
            .map(|(a, b)| vec![a.to_string(), b.to_string()])
            .collect::<Vec<_>>()
    };
    art::write_rows(
        &out.join(art::DENSITY),
        &["bin_center", "density"],
        pair(&dist.density),
    )?;
    art::write_rows(&out.join(art::ECDF), &["x", "F"], pair(&dist.ecdf))?;
    art::write_rows(
        &out.join(art::TAILS),
        &["x", "left_F", "reflected_right_F"],
        dist.tails
            .iter()
            .map(|(x, l, r)| vec![x.to_string(), l.to_string(), r.to_string()]),
    )?;

    let timeline = replay_events(&dataset.events)?;
    let ids: Vec<String> = vols.iter().map(|v| v.stock_id.clone()).collect();
    let splits = match split_dates(&timeline, &ids, cfg.as_of) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("warning: skipping group comparisons: {e}");
            return Ok(Report {
                kept: vols.len(),
                extra: json!({ "interval_curves": false }),
                ..Report::default()
            });
        }
    };
    let mut norm = Vec::new();
    let mut exc = Vec::new();
    for v in &vols {
        let (group, split) = splits[&v.stock_id];
        norm.push(SplitSeries {
            series: &v.normalized,
            group,
            split,
        });
        if let Ok(i) = returns.binary_search_by(|r| r.stock_id.cmp(&v.stock_id)) {
            exc.push(SplitSeries {
                series: &returns[i].excess,
                group,
                split,
            });
        }
    }
    write_curve(
        &out.join(art::SKEW_INTERVAL),
        &interval_curves(&norm, IntervalStatistic::Skewness, &INTERVALS),
    )?;
    write_curve(
        &out.join(art::CORR_INTERVAL),
        &interval_curves(&exc, IntervalStatistic::Correlation, &INTERVALS),
    )?;

    let mut tests = BTreeMap::new();
    for (name, series, stat) in [
        ("skewness_normalized", &norm, IntervalStatistic::Skewness),
        ("correlation_excess", &exc, IntervalStatistic::Correlation),
    ] {
        for g in [Group::Group1, Group::Group2] {
            let v = match before_after_test(series, g, stat, cfg.min_panel_obs) {
                Ok(t) => serde_json::to_value(t).expect("serializes"),
                Err(e) => json!({ "error": e.to_string() }),
            };
            tests.insert(format!("{name}/{}", g.label()), v);
        }
    }
    art::write_json(&out.join(art::BEFORE_AFTER), &tests)?;
    Ok(Report {
        kept: vols.len(),
        extra: json!({ "interval_curves": true }),
        ..Report::default()
    })
}

fn run_one(cfg: &RunConfig, stage: Stage) -> Result<(), CliError> {
    let t0 = Instant::now();
    let report = match stage {
        Stage::Simulate => simulate(cfg)?,
        Stage::Excess => excess(cfg)?,
        Stage::Egarch => egarch(cfg)?,
        Stage::Stats => stats(cfg)?,
        Stage::Panel => panel(cfg)?,
        Stage::Figures => figures(cfg)?,
        Stage::All => unreachable!("expanded by run_stage"),
    };
    if stage != Stage::Simulate {
        record_stage(cfg, stage, t0.elapsed().as_secs_f64(), &report)?;
    }
    eprintln!(
        "{stage}: kept {}, dropped {} ({:.2}s)",
        report.kept,
        report.dropped.len(),
        t0.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Runs one stage, or every analysis stage in order for `All`.
pub fn run_stage(cfg: &RunConfig, stage: Stage) -> Result<(), CliError> {
    cfg.validate()?;
    let target = if stage == Stage::Simulate {
        &cfg.data_dir
    } else {
        &cfg.out_dir
    };
    std::fs::create_dir_all(target)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", target.display())))?;
    if stage == Stage::All {
        for s in [
            Stage::Excess,
            Stage::Egarch,
            Stage::Stats,
            Stage::Panel,
            Stage::Figures,
        ] {
            run_one(cfg, s)?;
        }
        Ok(())
    } else {
        run_one(cfg, stage)
    }
}
