use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asymmetry"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

const FAST: &[&str] = &["--data", "d", "--set", "window_max_evals=1500"];

fn with(base: &[&str], extra: &[&'static str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run_all(dir: &Path, out: &str) {
    let args = with(&["all", "--out", out], FAST);
    ok(dir, &args.iter().map(String::as_str).collect::<Vec<_>>());
}

fn simulate(dir: &Path) {
    ok(
        dir,
        &["simulate", "--data", "d", "--seed", "11", "--n-stocks", "8"],
    );
}

#[test]
fn simulate_then_all_emits_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    simulate(dir);
    for f in [
        "prices.csv",
        "factors.csv",
        "turnover.csv",
        "meta.csv",
        "events.csv",
        "ground_truth.csv",
        "manifest.json",
    ] {
        assert!(dir.join("d").join(f).is_file(), "missing {f}");
    }
    run_all(dir, "o");
    for f in [
        "returns.csv",
        "egarch_fits.csv",
        "normalized.csv",
        "per_stock_stats.csv",
        "summary.json",
        "summary.txt",
        "panel_samples_quarter.csv",
        "panel_fits_quarter.json",
        "table_quarter.txt",
        "density.csv",
        "ecdf.csv",
        "tails.csv",
        "skew_interval.csv",
        "corr_interval.csv",
        "run_manifest.json",
    ] {
        assert!(dir.join("o").join(f).is_file(), "missing {f}");
    }
    let table = std::fs::read_to_string(dir.join("o/table_quarter.txt")).unwrap();
    for label in [
        "turnover rate",
        "short sale practiced",
        "Obs.",
        "R-square adjusted",
        "Industry fixed effect",
    ] {
        assert!(table.contains(label), "table lacks {label}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("o/run_manifest.json")).unwrap())
            .unwrap();
    for stage in ["excess", "egarch", "stats", "panel", "figures"] {
        assert!(manifest[stage]["seconds"].is_number(), "{stage} not timed");
        assert!(manifest[stage]["dropped"].is_number());
    }
}

#[test]
fn stages_are_deterministic_and_compose_to_all() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    simulate(dir);
    run_all(dir, "a");
    for stage in ["excess", "egarch", "stats", "panel", "figures"] {
        let args = with(&[stage, "--out", "b"], FAST);
        ok(dir, &args.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let mut compared = 0;
    for entry in std::fs::read_dir(dir.join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "run_manifest.json" {
            continue;
        }
        let a = std::fs::read(dir.join("a").join(&name)).unwrap();
        let b = std::fs::read(dir.join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs");
        compared += 1;
    }
    assert!(compared >= 15);
}

#[test]
fn windowing_sets_time_dummies() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    simulate(dir);
    run_all(dir, "o");
    let args = with(&["panel", "--out", "o", "--windowing", "half_year"], FAST);
    ok(dir, &args.iter().map(String::as_str).collect::<Vec<_>>());
    for (w, n) in [("quarter", 33), ("half_year", 17)] {
        let fits: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.join(format!("o/panel_fits_{w}.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(fits["n_windows"], n);
        assert_eq!(fits["fits"][0]["time_levels"], n);
    }
}

#[test]
fn unknown_config_key_exits_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.cfg"), "seed = 2\nmin_panle_obs = 40\n").unwrap();
    let out = run(tmp.path(), &["stats", "--config", "run.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("min_panle_obs"));

    let out = run(tmp.path(), &["stats", "--set", "bins=0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_upstream_artifact_names_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["egarch", "--out", "o"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`excess`"));

    let out = run(tmp.path(), &["excess", "--data", "nothing", "--out", "o"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`simulate`"));
}

#[test]
fn config_file_drives_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("run.cfg"),
        "# synthetic run\ndata_dir = d\nout_dir = o\nseed = 11\nn_stocks = 4\nscenario = null\n",
    )
    .unwrap();
    ok(dir, &["simulate", "--config", "run.cfg"]);
    ok(dir, &["excess", "--config", "run.cfg"]);
    let returns = std::fs::read_to_string(dir.join("o/excess_stocks.csv")).unwrap();
    assert_eq!(returns.lines().count(), 5);
    let events = std::fs::read_to_string(dir.join("d/events.csv")).unwrap();
    assert_eq!(events.lines().count(), 1, "null market has no list events");
}
