//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes and returns plain numbers, arrays or JSON strings so the
//! page needs no bundler or framework.

use asymmetry_core::events::{anonymous_events, designated_list_history, replay_events};
use asymmetry_core::figures::{INTERVALS, MIN_AGGREGATED_OBS};
use asymmetry_core::market_data::aggregate_values;
use asymmetry_core::simulator::{egarch_simulate_with, typical_egarch, Innovation};
use asymmetry_core::stats::{return_volatility_correlation, skewness};
use asymmetry_core::Error;
use wasm_bindgen::prelude::*;

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn path(xi1: f64, shock_skew: f64, n: usize, seed: u32) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let p = egarch_simulate_with(
        &typical_egarch(xi1),
        n,
        u64::from(seed),
        Innovation::from_skew(shock_skew),
    )?;
    Ok((p.eps, p.sigma))
}

/// Innovations followed by conditional volatilities (length `2 * n`).
pub fn path_values(xi1: f64, shock_skew: f64, n: usize, seed: u32) -> Result<Vec<f64>, Error> {
    let (mut eps, sigma) = path(xi1, shock_skew, n, seed)?;
    eps.extend(sigma);
    Ok(eps)
}

/// Skewness then return-volatility correlation of non-overlapping k-day sums,
/// one value per interval; NaN where fewer than ten sums are available.
pub fn interval_values(xi1: f64, shock_skew: f64, n: usize, seed: u32) -> Result<Vec<f64>, Error> {
    let (eps, _) = path(xi1, shock_skew, n, seed)?;
    let mut skew = Vec::new();
    let mut corr = Vec::new();
    for k in INTERVALS {
        let agg = aggregate_values(&eps, k);
        let ok = agg.len() >= MIN_AGGREGATED_OBS;
        skew.push(if ok {
            skewness(&agg).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        });
        corr.push(if ok {
            return_volatility_correlation(&agg).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        });
    }
    skew.extend(corr);
    Ok(skew)
}

/// Daily counts of the replayed designated-list history as JSON rows
/// `{date, added, deleted, on_list}`.
pub fn list_counts_json() -> Result<String, Error> {
    let events = anonymous_events(&designated_list_history())?;
    let timeline = replay_events(&events)?;
    Ok(serde_json::to_string(timeline.counts()).expect("counts serialize"))
}

#[wasm_bindgen]
pub fn simulate_path(xi1: f64, shock_skew: f64, n: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    path_values(xi1, shock_skew, n, seed).map_err(js_err)
}

/// Return intervals (trading days) used by `interval_statistics`.
#[wasm_bindgen]
pub fn intervals() -> Vec<u32> {
    INTERVALS.iter().map(|k| *k as u32).collect()
}

#[wasm_bindgen]
pub fn interval_statistics(
    xi1: f64,
    shock_skew: f64,
    n: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    interval_values(xi1, shock_skew, n, seed).map_err(js_err)
}

#[wasm_bindgen]
pub fn list_replay() -> Result<String, JsError> {
    list_counts_json().map_err(js_err)
}
