use asymmetry_core::egarch::FitOptions;
use asymmetry_core::events::replay_events;
use asymmetry_core::market_data::{ingest_dataset, DatasetFiles, IngestOptions};
use asymmetry_core::panel::{build_samples, PanelConfig, StockPanelInput};
use asymmetry_core::pipeline::{egarch_stage, excess_stage, AnalysisConfig};
use asymmetry_core::simulator::{simulate_market, write_market, SimConfig};
use chrono::NaiveDate;

#[test]
fn simulation_is_bit_reproducible_and_truth_covers_every_stock() {
    let cfg = SimConfig::regime_experiment(3, 6);
    let a = simulate_market(&cfg).unwrap();
    let b = simulate_market(&cfg).unwrap();
    assert_eq!(a.dataset.canonical_json(), b.dataset.canonical_json());
    assert_eq!(a.truth, b.truth);
    let ids: Vec<&String> = a.dataset.stock_ids().collect();
    assert_eq!(ids.len(), 6);
    for t in &a.truth {
        assert!(ids.contains(&&t.stock_id));
        assert!(a.dataset.meta.contains_key(&t.stock_id));
    }
    let other = simulate_market(&SimConfig::regime_experiment(4, 6)).unwrap();
    assert_ne!(a.dataset.canonical_json(), other.dataset.canonical_json());
}

#[test]
fn written_market_ingests_back_to_the_same_dataset() {
    let market = simulate_market(&SimConfig::regime_experiment(9, 4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_market(&market, dir.path()).unwrap();
    let files = DatasetFiles::in_dir(dir.path());
    let first = ingest_dataset(&files, &IngestOptions::default()).unwrap();
    let second = ingest_dataset(&files, &IngestOptions::default()).unwrap();
    assert_eq!(first.canonical_json(), second.canonical_json());
    assert_eq!(first.calendar, market.dataset.calendar);
    assert_eq!(first.events, market.dataset.events);
    assert!(first.diagnostics.is_empty());
    for (id, p) in &market.dataset.prices {
        let q = &first.prices[id];
        assert_eq!(p.len(), q.len());
        for (a, b) in p.observations().iter().zip(q.observations()) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() <= 1e-12 * a.1.abs());
        }
    }
}

#[test]
fn pipeline_through_panel_samples() {
    let market = simulate_market(&SimConfig::regime_experiment(21, 6)).unwrap();
    let data = &market.dataset;
    let cfg = AnalysisConfig::default();
    let excess = excess_stage(data, &cfg);
    assert_eq!(excess.stocks.len() + excess.dropped.len(), 6);
    for s in &excess.stocks {
        let d = s.excess.dates();
        assert!(d.windows(2).all(|w| w[0] < w[1]), "excess dates overlap");
        assert!(d[0] >= cfg.period_start && *d.last().unwrap() <= cfg.period_end);
        assert!(s.excess.len() > cfg.min_excess_obs);
    }

    let egarch = egarch_stage(&excess.stocks, &FitOptions::default());
    assert!(!egarch.stocks.is_empty());
    let timeline = replay_events(&data.events).unwrap();
    let inputs: Vec<StockPanelInput> = egarch
        .stocks
        .iter()
        .map(|v| {
            let r = excess
                .stocks
                .iter()
                .find(|r| r.stock_id == v.stock_id)
                .unwrap();
            StockPanelInput {
                stock_id: &v.stock_id,
                industry_code: &data.meta[&v.stock_id].industry_code,
                raw: &r.raw,
                excess: &r.excess,
                normalized: &v.normalized,
                full_fit: v.params,
                turnover: data.turnover.get(&v.stock_id),
            }
        })
        .collect();
    let pcfg = PanelConfig {
        window_max_evals: 2000,
        ..PanelConfig::default()
    };
    let build = build_samples(&inputs, &timeline, &data.calendar, &pcfg);
    assert_eq!(build.windows.len(), 33);
    assert!(!build.samples.is_empty());
    for s in &build.samples {
        assert!(
            s.u <= s.v,
            "{} shortable outside the designated group",
            s.stock_id
        );
        assert!(s.n_obs >= pcfg.min_obs);
    }
    // Listed stocks are shortable in the last window of the study.
    let late = NaiveDate::from_ymd_opt(2014, 1, 1).unwrap();
    assert!(build
        .samples
        .iter()
        .filter(|s| build.windows[s.window].start >= late && s.v == 1)
        .all(|s| s.u == 1));
}
