use asymmetry_wasm_demo::{interval_values, intervals, list_counts_json, path_values};

#[test]
fn path_has_innovations_then_volatilities() {
    let v = path_values(0.1, 0.25, 500, 9).unwrap();
    assert_eq!(v.len(), 1000);
    assert!(v[500..].iter().all(|s| *s > 0.0));
    assert_eq!(v, path_values(0.1, 0.25, 500, 9).unwrap());
}

#[test]
fn invalid_shock_skew_is_an_error() {
    assert!(path_values(0.1, 1.5, 100, 1).is_err());
}

#[test]
fn interval_statistics_cover_every_interval() {
    let v = interval_values(0.1, 0.25, 3000, 4).unwrap();
    assert_eq!(v.len(), 2 * intervals().len());
    assert!(v.iter().all(|x| x.is_finite()));
    // Right-skewed shocks with anti-leverage: positive daily skewness and
    // positive return-volatility correlation.
    assert!(v[0] > 0.0);
    assert!(v[intervals().len()] > 0.0);
}

#[test]
fn short_paths_give_nan_at_long_intervals() {
    let v = interval_values(0.0, 0.0, 60, 2).unwrap();
    // 60 days: six 10-day sums is below the minimum.
    assert!(v[intervals().len() - 1].is_nan());
    assert!(v[0].is_finite());
}

#[test]
fn list_replay_ends_at_758() {
    let rows: serde_json::Value = serde_json::from_str(&list_counts_json().unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows[0]["on_list"], 90);
    assert_eq!(rows[19]["on_list"], 758);
}
