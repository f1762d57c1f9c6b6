use std::fs;

use leo_lora::config::{emit_scenario, load_scenario, load_sweep, parse_scenario};
use leo_lora::engine::Scenario;
use leo_lora::sweep::{emit_figures_data, run_sweep, write_csv, write_json, Preset};
use leo_lora::Error;

#[test]
fn scenario_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    fs::write(&path, "altitude_km = 650\nbeamwidth_deg = 12.5\nshadowing_sigma_db = 0.5\nduty_cycle = 0.01\n").unwrap();
    let sc = load_scenario(&path).unwrap();
    assert_eq!(sc.satellite.altitude_km, 650.0);
    fs::write(&path, emit_scenario(&sc)).unwrap();
    assert_eq!(load_scenario(&path).unwrap(), sc);
}

#[test]
fn missing_file_is_not_a_config_error() {
    let err = load_scenario(std::path::Path::new("/nonexistent/x.toml")).unwrap_err();
    assert!(matches!(err, Error::Io(_)));
    assert!(!err.is_config_error());
}

#[test]
fn range_errors_name_the_field() {
    for (text, field) in [
        ("period_s = -1", "period_s"),
        ("replications = 0", "replications"),
        ("bandwidth_hz = 0", "bandwidth_hz"),
        ("channels_hz = []", "channels_hz"),
        ("coding_rate_index = 7", "coding_rate_index"),
        ("density_per_km2 = -0.5", "density_per_km2"),
    ] {
        let err = parse_scenario(text).unwrap_err();
        assert!(err.to_string().contains(field), "{text}: {err}");
    }
}

#[test]
fn sweep_file_runs_and_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.toml");
    fs::write(
        &path,
        "replications = 2\nduration_s = 120\nsweep_altitude_km = [300, 600]\nsweep_period_s = [60, 10]\n",
    )
    .unwrap();
    let spec = load_sweep(&path).unwrap();
    assert_eq!(spec.len(), 4);
    let res = run_sweep(&spec, Some(2)).unwrap();
    let rows = res.rows(spec.base.base_seed);
    assert_eq!(rows.len(), 4 * 3);

    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert_eq!(csv.lines().count(), 13);

    let mut json = Vec::new();
    write_json(&rows, &mut json).unwrap();
    let parsed: serde_json::Value = serde_json::from_slice(&json).unwrap();
    let first = &parsed[0];
    let header = csv.lines().next().unwrap();
    for key in header.split(',') {
        assert!(first.get(key).is_some(), "json row lacks {key}");
    }
}

#[test]
fn figures_for_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = Preset::All.spec();
    spec.base.replications = 1;
    spec.base.duration_s = 60.0;
    let res = run_sweep(&spec, None).unwrap();
    let files = emit_figures_data(&res, Preset::All, dir.path(), false).unwrap();
    let lines = |name: &str| fs::read_to_string(dir.path().join(name)).unwrap().lines().count();
    assert_eq!(files.len(), 6);
    assert_eq!(lines("coverage.csv"), 19);
    assert_eq!(lines("prr_g5.csv"), 19);
    assert_eq!(lines("dr_distribution_g10.csv"), 19);
    assert_eq!(lines("prr_period.csv"), 19);
}

#[test]
fn defaults_are_documented_values() {
    let sc = Scenario::default();
    assert_eq!(sc.duration_s, 600.0);
    assert_eq!(sc.replications, 10);
    assert_eq!(sc.period_s, 60.0);
    assert_eq!(sc.gains.total(), 5.0);
}
