//! Flat TOML scenario files.
//!
//! Every key is top level. Missing keys take the [`Scenario::default`]
//! values; unknown keys are rejected with the closest known key as a hint.
//!
//! ```toml
//! altitude_km = 500
//! beamwidth_deg = 10
//! total_gain_dbi = 5
//! period_s = 60
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{AntennaGains, ShadowingSigma};
use crate::engine::{AirtimeModel, Scenario};
use crate::error::{Error, Result};
use crate::gateway::{CaptureMode, IsolationMatrix};
use crate::phy::{LoraRateTable, SpreadingFactor};
use crate::sweep::{OutputFormat, SweepSpec};
use crate::traffic::DutyCycle;

pub const SCENARIO_KEYS: &[&str] = &[
    "altitude_km",
    "beamwidth_deg",
    "earth_radius_km",
    "tx_power_dbm",
    "bandwidth_hz",
    "carrier_hz",
    "payload_bytes",
    "preamble_symbols",
    "explicit_header",
    "crc_on",
    "coding_rate_index",
    "airtime_model",
    "density_per_km2",
    "device_count",
    "forced_sf",
    "total_gain_dbi",
    "tx_gain_dbi",
    "rx_gain_dbi",
    "period_s",
    "duration_s",
    "replications",
    "base_seed",
    "scintillation_pfluc_db",
    "clutter_loss_db",
    "shadowing_sigma_db",
    "extra_margin_db",
    "latitude_deg",
    "channels_hz",
    "isolation_db",
    "demodulator_paths",
    "capture_mode",
    "duty_cycle",
    "count_suppressed_as_sent",
    "bit_rate_bps",
    "sensitivity_dbm",
    "time_on_air_ms",
];

pub const SWEEP_KEYS: &[&str] = &[
    "sweep_altitude_km",
    "sweep_beamwidth_deg",
    "sweep_total_gain_dbi",
    "sweep_period_s",
    "output",
    "format",
];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct ScenarioFile {
    altitude_km: Option<f64>,
    beamwidth_deg: Option<f64>,
    earth_radius_km: Option<f64>,
    tx_power_dbm: Option<f64>,
    bandwidth_hz: Option<f64>,
    carrier_hz: Option<f64>,
    payload_bytes: Option<u32>,
    preamble_symbols: Option<u32>,
    explicit_header: Option<bool>,
    crc_on: Option<bool>,
    coding_rate_index: Option<u8>,
    airtime_model: Option<AirtimeModel>,
    density_per_km2: Option<f64>,
    device_count: Option<u64>,
    forced_sf: Option<u8>,
    total_gain_dbi: Option<f64>,
    tx_gain_dbi: Option<f64>,
    rx_gain_dbi: Option<f64>,
    period_s: Option<f64>,
    duration_s: Option<f64>,
    replications: Option<u32>,
    base_seed: Option<u64>,
    scintillation_pfluc_db: Option<f64>,
    clutter_loss_db: Option<f64>,
    shadowing_sigma_db: Option<ShadowingSigma>,
    extra_margin_db: Option<f64>,
    latitude_deg: Option<f64>,
    channels_hz: Option<Vec<f64>>,
    isolation_db: Option<[[f64; 6]; 6]>,
    demodulator_paths: Option<PathsValue>,
    capture_mode: Option<CaptureMode>,
    duty_cycle: Option<DutyValue>,
    count_suppressed_as_sent: Option<bool>,
    bit_rate_bps: Option<[f64; 6]>,
    sensitivity_dbm: Option<[f64; 6]>,
    time_on_air_ms: Option<[f64; 6]>,
    // sweep-only keys
    sweep_altitude_km: Option<Vec<f64>>,
    sweep_beamwidth_deg: Option<Vec<f64>>,
    sweep_total_gain_dbi: Option<Vec<f64>>,
    sweep_period_s: Option<Vec<f64>>,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PathsValue {
    Count(u32),
    Word(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum DutyValue {
    Fraction(f64),
    Word(String),
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Parse(e.to_string()))
}

fn check_keys(table: &toml::Table, allowed: &[&[&str]]) -> Result<()> {
    let known: Vec<&str> = allowed.iter().flat_map(|k| k.iter().copied()).collect();
    for key in table.keys() {
        if !known.contains(&key.as_str()) {
            let suggestion = known
                .iter()
                .map(|k| (strsim::jaro_winkler(key, k), *k))
                .filter(|(score, _)| *score > 0.8)
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, k)| k.to_string());
            return Err(Error::UnknownKey {
                key: key.clone(),
                suggestion,
            });
        }
    }
    Ok(())
}

fn decode(table: toml::Table) -> Result<ScenarioFile> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))
}

fn apply(file: &ScenarioFile, mut sc: Scenario) -> Result<Scenario> {
    macro_rules! set {
        ($($key:ident => $target:expr),* $(,)?) => {
            $(if let Some(v) = file.$key.clone() { $target = v; })*
        };
    }
    set! {
        altitude_km => sc.satellite.altitude_km,
        beamwidth_deg => sc.satellite.beamwidth_deg,
        earth_radius_km => sc.satellite.earth_radius_km,
        tx_power_dbm => sc.radio.tx_power_dbm,
        bandwidth_hz => sc.radio.bandwidth_hz,
        carrier_hz => sc.radio.carrier_hz,
        payload_bytes => sc.radio.payload_bytes,
        preamble_symbols => sc.radio.preamble_symbols,
        explicit_header => sc.radio.explicit_header,
        crc_on => sc.radio.crc_on,
        coding_rate_index => sc.radio.coding_rate_index,
        airtime_model => sc.airtime_model,
        density_per_km2 => sc.density_per_km2,
        period_s => sc.period_s,
        duration_s => sc.duration_s,
        replications => sc.replications,
        base_seed => sc.base_seed,
        scintillation_pfluc_db => sc.channel.scintillation_pfluc_db,
        clutter_loss_db => sc.channel.clutter_loss_db,
        shadowing_sigma_db => sc.channel.shadowing_sigma_db,
        extra_margin_db => sc.channel.extra_margin_db,
        channels_hz => sc.channels_hz,
        capture_mode => sc.reception.capture_mode,
        count_suppressed_as_sent => sc.count_suppressed_as_sent,
    }
    if let Some(isolation) = file.isolation_db {
        sc.reception.isolation = IsolationMatrix(isolation);
    }
    if file.latitude_deg.is_some() {
        sc.channel.latitude_deg = file.latitude_deg;
    }
    if file.device_count.is_some() {
        sc.fixed_device_count = file.device_count;
    }
    if let Some(sf) = file.forced_sf {
        sc.forced_sf = Some(SpreadingFactor::new(sf).map_err(|e| Error::field("forced_sf", e.to_string()))?);
    }
    match (file.total_gain_dbi, file.tx_gain_dbi, file.rx_gain_dbi) {
        (Some(total), None, None) => sc.gains = AntennaGains::from_total(total),
        (Some(_), _, _) => {
            return Err(Error::field(
                "total_gain_dbi",
                "give either total_gain_dbi or tx_gain_dbi/rx_gain_dbi, not both",
            ))
        }
        (None, tx, rx) => {
            if let Some(tx) = tx {
                sc.gains.tx_dbi = tx;
            }
            if let Some(rx) = rx {
                sc.gains.rx_dbi = rx;
            }
        }
    }
    if let Some(p) = &file.demodulator_paths {
        sc.reception.demodulator_paths = match p {
            PathsValue::Count(n) => Some(*n),
            PathsValue::Word(w) if w == "unlimited" => None,
            PathsValue::Word(w) => {
                return Err(Error::field(
                    "demodulator_paths",
                    format!("expected a count or \"unlimited\", got \"{w}\""),
                ))
            }
        };
    }
    if let Some(d) = &file.duty_cycle {
        sc.duty_cycle = match d {
            DutyValue::Fraction(f) => DutyCycle::Limit(*f),
            DutyValue::Word(w) if w == "off" => DutyCycle::Off,
            DutyValue::Word(w) => {
                return Err(Error::field(
                    "duty_cycle",
                    format!("expected a fraction or \"off\", got \"{w}\""),
                ))
            }
        };
    }
    if file.bit_rate_bps.is_some() || file.sensitivity_dbm.is_some() || file.time_on_air_ms.is_some() {
        let mut rows = *sc.rate_table.rows();
        for (i, row) in rows.iter_mut().enumerate() {
            if let Some(v) = file.bit_rate_bps {
                row.bit_rate_bps = v[i];
            }
            if let Some(v) = file.sensitivity_dbm {
                row.sensitivity_dbm = v[i];
            }
            if let Some(v) = file.time_on_air_ms {
                row.time_on_air_ms_32b = v[i];
            }
        }
        sc.rate_table = LoraRateTable::from_rows(rows);
    }
    sc.validate()?;
    Ok(sc)
}

/// Parses a scenario from TOML text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let table = parse_table(text)?;
    check_keys(&table, &[SCENARIO_KEYS])?;
    apply(&decode(table)?, Scenario::default())
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Parses a sweep: scenario keys plus `sweep_*` axes.
pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let table = parse_table(text)?;
    check_keys(&table, &[SCENARIO_KEYS, SWEEP_KEYS])?;
    let file = decode(table)?;
    let base = apply(&file, Scenario::default())?;
    let spec = SweepSpec {
        altitudes_km: file.sweep_altitude_km.clone().unwrap_or(vec![base.satellite.altitude_km]),
        beamwidths_deg: file.sweep_beamwidth_deg.clone().unwrap_or(vec![base.satellite.beamwidth_deg]),
        total_gains_dbi: file.sweep_total_gain_dbi.clone().unwrap_or(vec![base.gains.total()]),
        periods_s: file.sweep_period_s.clone().unwrap_or(vec![base.period_s]),
        output: file.output.clone(),
        format: file.format.unwrap_or_default(),
        base,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_sweep(path: &Path) -> Result<SweepSpec> {
    parse_sweep(&std::fs::read_to_string(path)?)
}

/// Serializes every scenario field as a flat TOML document.
pub fn emit_scenario(sc: &Scenario) -> String {
    let rows = sc.rate_table.rows();
    let file = ScenarioFile {
        altitude_km: Some(sc.satellite.altitude_km),
        beamwidth_deg: Some(sc.satellite.beamwidth_deg),
        earth_radius_km: Some(sc.satellite.earth_radius_km),
        tx_power_dbm: Some(sc.radio.tx_power_dbm),
        bandwidth_hz: Some(sc.radio.bandwidth_hz),
        carrier_hz: Some(sc.radio.carrier_hz),
        payload_bytes: Some(sc.radio.payload_bytes),
        preamble_symbols: Some(sc.radio.preamble_symbols),
        explicit_header: Some(sc.radio.explicit_header),
        crc_on: Some(sc.radio.crc_on),
        coding_rate_index: Some(sc.radio.coding_rate_index),
        airtime_model: Some(sc.airtime_model),
        density_per_km2: Some(sc.density_per_km2),
        device_count: sc.fixed_device_count,
        forced_sf: sc.forced_sf.map(|s| s.value()),
        total_gain_dbi: None,
        tx_gain_dbi: Some(sc.gains.tx_dbi),
        rx_gain_dbi: Some(sc.gains.rx_dbi),
        period_s: Some(sc.period_s),
        duration_s: Some(sc.duration_s),
        replications: Some(sc.replications),
        base_seed: Some(sc.base_seed),
        scintillation_pfluc_db: Some(sc.channel.scintillation_pfluc_db),
        clutter_loss_db: Some(sc.channel.clutter_loss_db),
        shadowing_sigma_db: Some(sc.channel.shadowing_sigma_db.clone()),
        extra_margin_db: Some(sc.channel.extra_margin_db),
        latitude_deg: sc.channel.latitude_deg,
        channels_hz: Some(sc.channels_hz.clone()),
        isolation_db: Some(sc.reception.isolation.0),
        demodulator_paths: Some(match sc.reception.demodulator_paths {
            Some(n) => PathsValue::Count(n),
            None => PathsValue::Word("unlimited".into()),
        }),
        capture_mode: Some(sc.reception.capture_mode),
        duty_cycle: Some(match sc.duty_cycle {
            DutyCycle::Off => DutyValue::Word("off".into()),
            DutyCycle::Limit(f) => DutyValue::Fraction(f),
        }),
        count_suppressed_as_sent: Some(sc.count_suppressed_as_sent),
        bit_rate_bps: Some(rows.map(|r| r.bit_rate_bps)),
        sensitivity_dbm: Some(rows.map(|r| r.sensitivity_dbm)),
        time_on_air_ms: Some(rows.map(|r| r.time_on_air_ms_32b)),
        ..ScenarioFile::default()
    };
    toml::to_string(&file).expect("flat scenario serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RURAL_LOS_SIGMA_DB;

    #[test]
    fn minimal_file_takes_defaults() {
        let sc = parse_scenario("altitude_km = 500\nbeamwidth_deg = 10\n").unwrap();
        assert_eq!(sc.satellite.altitude_km, 500.0);
        assert_eq!(sc.satellite.beamwidth_deg, 10.0);
        assert_eq!(sc.radio.tx_power_dbm, 14.0);
        assert_eq!(sc.radio.bandwidth_hz, 125e3);
        assert_eq!(sc.radio.carrier_hz, 868e6);
        assert_eq!(sc.density_per_km2, 0.01);
        assert_eq!(sc.radio.payload_bytes, 32);
        assert_eq!(sc.satellite.earth_radius_km, 6371.0);
        assert_eq!(sc, Scenario::default());
    }

    #[test]
    fn out_of_range_beamwidth() {
        let err = parse_scenario("beamwidth_deg = 200").unwrap_err();
        assert!(err.to_string().contains("beamwidth must be in (0, 180)"), "{err}");
        assert!(err.is_config_error());
    }

    #[test]
    fn unknown_key_suggests() {
        let err = parse_scenario("altitudekm = 500").unwrap_err();
        match &err {
            Error::UnknownKey { key, suggestion } => {
                assert_eq!(key, "altitudekm");
                assert_eq!(suggestion.as_deref(), Some("altitude_km"));
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("did you mean `altitude_km`"));
        // sweep keys are not valid in a plain scenario
        assert!(parse_scenario("sweep_period_s = [10]").is_err());
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_scenario("altitude_km = 500\nbeamwidth_deg = = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn type_error_names_key() {
        let err = parse_scenario("period_s = \"soon\"").unwrap_err();
        assert!(err.to_string().contains("period_s"), "{err}");
    }

    #[test]
    fn gain_forms() {
        let sc = parse_scenario("total_gain_dbi = 10").unwrap();
        assert_eq!(sc.gains.total(), 10.0);
        let sc = parse_scenario("tx_gain_dbi = 1.9\nrx_gain_dbi = 8.5").unwrap();
        assert!((sc.gains.total() - 10.4).abs() < 1e-12);
        assert!(parse_scenario("total_gain_dbi = 10\nrx_gain_dbi = 8").is_err());
    }

    #[test]
    fn special_values() {
        let sc = parse_scenario(
            "demodulator_paths = \"unlimited\"\nduty_cycle = 0.01\nshadowing_sigma_db = [1.79, 1.14, 1.14, 0.92, 1.42, 1.56, 0.85, 0.72, 0.72]\ncapture_mode = \"peak-power\"\nforced_sf = 12",
        )
        .unwrap();
        assert_eq!(sc.reception.demodulator_paths, None);
        assert_eq!(sc.duty_cycle, DutyCycle::Limit(0.01));
        assert_eq!(sc.channel.shadowing_sigma_db, ShadowingSigma::ByElevation(RURAL_LOS_SIGMA_DB));
        assert_eq!(sc.reception.capture_mode, CaptureMode::PeakPower);
        assert_eq!(sc.forced_sf, Some(SpreadingFactor::SF12));
        assert!(parse_scenario("duty_cycle = \"on\"").is_err());
        assert!(parse_scenario("duty_cycle = 1.5").is_err());
        assert!(parse_scenario("forced_sf = 13").is_err());
        assert!(parse_scenario("demodulator_paths = 0").is_err());
    }

    #[test]
    fn emit_round_trips() {
        let mut sc = Scenario::default();
        sc.channel.latitude_deg = Some(12.5);
        sc.channel.extra_margin_db = 5.25;
        sc.reception.demodulator_paths = None;
        sc.duty_cycle = DutyCycle::Limit(0.01);
        sc.channels_hz = vec![868.1e6, 868.3e6, 868.5e6];
        sc.gains = AntennaGains { tx_dbi: 1.9, rx_dbi: 8.5 };
        sc.fixed_device_count = Some(7);
        let again = parse_scenario(&emit_scenario(&sc)).unwrap();
        assert_eq!(again, sc);
        let default = Scenario::default();
        assert_eq!(parse_scenario(&emit_scenario(&default)).unwrap(), default);
    }

    #[test]
    fn sweep_file() {
        let spec = parse_sweep(
            "total_gain_dbi = 5\nsweep_altitude_km = [200, 300, 400, 500, 600, 700]\nsweep_beamwidth_deg = [5, 10, 15]\nformat = \"json\"",
        )
        .unwrap();
        assert_eq!(spec.points().len(), 18);
        assert_eq!(spec.format, OutputFormat::Json);
        assert!(parse_sweep("sweep_period_s = []").is_err());
    }
}
