//! Cross-product sweeps, named presets and tabular output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{AntennaGains, ShadowingSigma, RURAL_LOS_SIGMA_DB};
use crate::engine::{self, AggregateResult, Scenario, EU868_DEFAULT_CHANNELS_HZ};
use crate::error::{Error, Result};

pub const FIGURE_ALTITUDES_KM: [f64; 6] = [200.0, 300.0, 400.0, 500.0, 600.0, 700.0];
pub const FIGURE_BEAMWIDTHS_DEG: [f64; 3] = [5.0, 10.0, 15.0];
pub const FIGURE_PERIODS_S: [f64; 3] = [60.0, 30.0, 10.0];

/// Extra loss that aligns the sensitivity-based SF choice with the reference
/// DR distributions. Fitted by `examples/calibrate_margin.rs`.
pub const FIGURE_EXTRA_MARGIN_DB: f64 = 5.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: Scenario,
    pub altitudes_km: Vec<f64>,
    pub beamwidths_deg: Vec<f64>,
    pub total_gains_dbi: Vec<f64>,
    pub periods_s: Vec<f64>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub altitude_km: f64,
    pub beamwidth_deg: f64,
    pub total_gain_dbi: f64,
    pub period_s: f64,
}

impl SweepSpec {
    /// A one-point sweep of `base`.
    pub fn single(base: Scenario) -> Self {
        SweepSpec {
            altitudes_km: vec![base.satellite.altitude_km],
            beamwidths_deg: vec![base.satellite.beamwidth_deg],
            total_gains_dbi: vec![base.gains.total()],
            periods_s: vec![base.period_s],
            output: None,
            format: OutputFormat::Csv,
            base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [
            ("sweep_altitude_km", &self.altitudes_km),
            ("sweep_beamwidth_deg", &self.beamwidths_deg),
            ("sweep_total_gain_dbi", &self.total_gains_dbi),
            ("sweep_period_s", &self.periods_s),
        ] {
            if axis.is_empty() {
                return Err(Error::field(name, "axis must not be empty"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.altitudes_km.len() * self.beamwidths_deg.len() * self.total_gains_dbi.len() * self.periods_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in output order: gain, then beamwidth, then period, with
    /// altitude varying fastest.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::with_capacity(self.len());
        for &total_gain_dbi in &self.total_gains_dbi {
            for &beamwidth_deg in &self.beamwidths_deg {
                for &period_s in &self.periods_s {
                    for &altitude_km in &self.altitudes_km {
                        out.push(SweepPoint {
                            altitude_km,
                            beamwidth_deg,
                            total_gain_dbi,
                            period_s,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn scenario_at(&self, p: &SweepPoint) -> Scenario {
        let mut sc = self.base.clone();
        sc.satellite.altitude_km = p.altitude_km;
        sc.satellite.beamwidth_deg = p.beamwidth_deg;
        sc.gains = AntennaGains::from_total(p.total_gain_dbi);
        sc.period_s = p.period_s;
        sc
    }

    /// Human-readable plan, one line per point.
    pub fn plan(&self) -> String {
        let mut s = format!("{} points x {} replications\n", self.len(), self.base.replications);
        for (i, p) in self.points().iter().enumerate() {
            s.push_str(&format!(
                "{i:>4}  h={} km  theta={} deg  gain={} dBi  p={} s\n",
                p.altitude_km, p.beamwidth_deg, p.total_gain_dbi, p.period_s
            ));
        }
        s
    }
}

/// One output row. Aggregate rows carry `replication = "mean"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub altitude_km: f64,
    pub beamwidth_deg: f64,
    pub total_gain_dbi: f64,
    pub period_s: f64,
    pub replication: String,
    pub device_count: Option<u64>,
    pub coverage_radius_km: Option<f64>,
    pub prr: Option<f64>,
    pub prr_ci95: Option<f64>,
    pub avg_data_rate_bps: Option<f64>,
    pub dr_share_0: Option<f64>,
    pub dr_share_1: Option<f64>,
    pub dr_share_2: Option<f64>,
    pub dr_share_3: Option<f64>,
    pub dr_share_4: Option<f64>,
    pub dr_share_5: Option<f64>,
    pub infeasible_share: Option<f64>,
    pub sent: Option<u64>,
    pub received: Option<u64>,
    pub seed: u64,
    pub error: Option<String>,
}

impl SweepRow {
    fn blank(p: &SweepPoint, replication: String, seed: u64) -> Self {
        SweepRow {
            altitude_km: p.altitude_km,
            beamwidth_deg: p.beamwidth_deg,
            total_gain_dbi: p.total_gain_dbi,
            period_s: p.period_s,
            replication,
            device_count: None,
            coverage_radius_km: None,
            prr: None,
            prr_ci95: None,
            avg_data_rate_bps: None,
            dr_share_0: None,
            dr_share_1: None,
            dr_share_2: None,
            dr_share_3: None,
            dr_share_4: None,
            dr_share_5: None,
            infeasible_share: None,
            sent: None,
            received: None,
            seed,
            error: None,
        }
    }

    fn set_shares(&mut self, shares: Option<[f64; 6]>) {
        if let Some(s) = shares {
            self.dr_share_0 = Some(s[0]);
            self.dr_share_1 = Some(s[1]);
            self.dr_share_2 = Some(s[2]);
            self.dr_share_3 = Some(s[3]);
            self.dr_share_4 = Some(s[4]);
            self.dr_share_5 = Some(s[5]);
        }
    }

    pub fn is_aggregate(&self) -> bool {
        self.replication == "mean"
    }

    pub fn dr_shares(&self) -> Option<[f64; 6]> {
        Some([
            self.dr_share_0?,
            self.dr_share_1?,
            self.dr_share_2?,
            self.dr_share_3?,
            self.dr_share_4?,
            self.dr_share_5?,
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub point: SweepPoint,
    pub result: std::result::Result<AggregateResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<PointResult>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_err()).count()
    }

    pub fn aggregate(&self, p: &SweepPoint) -> Option<&AggregateResult> {
        self.points
            .iter()
            .find(|r| r.point == *p)
            .and_then(|r| r.result.as_ref().ok())
    }

    /// Per-replication rows followed by the aggregate row, point by point.
    pub fn rows(&self, seed: u64) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for pr in &self.points {
            match &pr.result {
                Err(e) => {
                    let mut row = SweepRow::blank(&pr.point, "mean".into(), seed);
                    row.error = Some(e.clone());
                    rows.push(row);
                }
                Ok(agg) => {
                    for r in &agg.runs {
                        let mut row = SweepRow::blank(&pr.point, r.replication.to_string(), r.seed);
                        row.device_count = Some(r.device_count);
                        row.coverage_radius_km = Some(r.coverage_radius_km);
                        row.prr = r.prr;
                        row.avg_data_rate_bps = r.avg_data_rate_bps;
                        row.set_shares(r.dr_distribution);
                        row.infeasible_share = r.infeasible_share;
                        row.sent = Some(r.sent);
                        row.received = Some(r.received);
                        rows.push(row);
                    }
                    let mut row = SweepRow::blank(&pr.point, "mean".into(), seed);
                    row.device_count = Some(agg.device_count);
                    row.coverage_radius_km = Some(agg.coverage_radius_km);
                    row.prr = agg.prr.map(|e| e.mean);
                    row.prr_ci95 = agg.prr.map(|e| e.half_width_95);
                    row.avg_data_rate_bps = agg.avg_data_rate_bps.map(|e| e.mean);
                    row.set_shares(agg.dr_distribution);
                    row.infeasible_share = agg.infeasible_share;
                    row.sent = Some(agg.sent);
                    row.received = Some(agg.received);
                    rows.push(row);
                }
            }
        }
        rows
    }
}

/// Runs every point on a pool of `workers` threads (all cores when `None`).
/// Failed points are kept as errors; results come back in plan order.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::field("workers", "need at least one worker"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::field("workers", e.to_string()))?;
    let points = spec.points();
    let results = pool.install(|| {
        points
            .par_iter()
            .map(|p| PointResult {
                point: *p,
                result: engine::replicate(&spec.scenario_at(p)).map_err(|e| e.to_string()),
            })
            .collect::<Vec<_>>()
    });
    for r in &results {
        if let Err(e) = &r.result {
            log::warn!("sweep point h={} theta={} failed: {e}", r.point.altitude_km, r.point.beamwidth_deg);
        }
    }
    Ok(SweepResult { points: results })
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_rows<W: Write>(rows: &[SweepRow], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(rows, out),
        OutputFormat::Json => write_json(rows, out),
    }
}

/// Channel and loss settings that reproduce the reference figures: the
/// three EU868 default channels, elevation-dependent rural shadowing and a
/// fixed extra loss.
pub fn figure_calibration(sc: &mut Scenario) {
    sc.channels_hz = EU868_DEFAULT_CHANNELS_HZ.to_vec();
    sc.channel.shadowing_sigma_db = ShadowingSigma::ByElevation(RURAL_LOS_SIGMA_DB);
    sc.channel.extra_margin_db = FIGURE_EXTRA_MARGIN_DB;
}

pub fn figure_base() -> Scenario {
    let mut sc = Scenario::default();
    figure_calibration(&mut sc);
    sc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Coverage,
    Gain5,
    Gain10,
    Period,
    All,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Coverage, Preset::Gain5, Preset::Gain10, Preset::Period, Preset::All];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Coverage => "coverage",
            Preset::Gain5 => "gain5",
            Preset::Gain10 => "gain10",
            Preset::Period => "period",
            Preset::All => "all",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Preset::Coverage => "coverage radius and device count over h and theta",
            Preset::Gain5 => "DR shares and PRR, 5 dBi total gain, p = 60 s",
            Preset::Gain10 => "DR shares and PRR, 10 dBi total gain, p = 60 s",
            Preset::Period => "PRR over p and h, 10 dBi, theta = 10 deg",
            Preset::All => "every configuration above",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }

    pub fn spec(self) -> SweepSpec {
        let mut spec = SweepSpec {
            base: figure_base(),
            altitudes_km: FIGURE_ALTITUDES_KM.to_vec(),
            beamwidths_deg: FIGURE_BEAMWIDTHS_DEG.to_vec(),
            total_gains_dbi: vec![5.0],
            periods_s: vec![60.0],
            output: None,
            format: OutputFormat::Csv,
        };
        match self {
            Preset::Coverage => spec.base.replications = 1,
            Preset::Gain5 => {}
            Preset::Gain10 => spec.total_gains_dbi = vec![10.0],
            Preset::Period => {
                spec.total_gains_dbi = vec![10.0];
                spec.beamwidths_deg = vec![10.0];
                spec.periods_s = FIGURE_PERIODS_S.to_vec();
            }
            Preset::All => {
                spec.total_gains_dbi = vec![5.0, 10.0];
                spec.periods_s = FIGURE_PERIODS_S.to_vec();
            }
        }
        spec
    }

    /// Figure files this preset feeds.
    pub fn figure_files(self) -> &'static [&'static str] {
        match self {
            Preset::Coverage => &["coverage.csv"],
            Preset::Gain5 => &["dr_distribution_g5.csv", "prr_g5.csv"],
            Preset::Gain10 => &["dr_distribution_g10.csv", "prr_g10.csv"],
            Preset::Period => &["prr_period.csv"],
            Preset::All => &[
                "coverage.csv",
                "dr_distribution_g5.csv",
                "prr_g5.csv",
                "dr_distribution_g10.csv",
                "prr_g10.csv",
                "prr_period.csv",
            ],
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn figure_table(name: &str, result: &SweepResult) -> Vec<Vec<String>> {
    let ok = result.points.iter().filter_map(|p| p.result.as_ref().ok().map(|a| (p.point, a)));
    let mut rows: Vec<Vec<String>> = Vec::new();
    let (gain, header): (Option<f64>, &[&str]) = match name {
        "coverage.csv" => (None, &["altitude_km", "beamwidth_deg", "coverage_radius_km", "expected_device_count", "device_count"]),
        "dr_distribution_g5.csv" | "dr_distribution_g10.csv" => (
            Some(if name.ends_with("g5.csv") { 5.0 } else { 10.0 }),
            &["altitude_km", "beamwidth_deg", "dr_share_0", "dr_share_1", "dr_share_2", "dr_share_3", "dr_share_4", "dr_share_5", "avg_data_rate_bps"],
        ),
        "prr_g5.csv" | "prr_g10.csv" => (
            Some(if name.ends_with("g5.csv") { 5.0 } else { 10.0 }),
            &["altitude_km", "beamwidth_deg", "prr", "prr_ci95"],
        ),
        _ => (Some(10.0), &["altitude_km", "period_s", "prr", "prr_ci95"]),
    };
    rows.push(header.iter().map(|s| s.to_string()).collect());
    let mut seen_geometry = Vec::new();
    for (p, a) in ok {
        match name {
            "coverage.csv" => {
                let key = (p.altitude_km.to_bits(), p.beamwidth_deg.to_bits());
                if seen_geometry.contains(&key) {
                    continue;
                }
                seen_geometry.push(key);
                rows.push(vec![
                    p.altitude_km.to_string(),
                    p.beamwidth_deg.to_string(),
                    a.coverage_radius_km.to_string(),
                    a.expected_device_count.to_string(),
                    a.device_count.to_string(),
                ]);
            }
            "prr_period.csv" => {
                if Some(p.total_gain_dbi) == gain && p.beamwidth_deg == 10.0 {
                    rows.push(vec![
                        p.altitude_km.to_string(),
                        p.period_s.to_string(),
                        fmt_opt(a.prr.map(|e| e.mean)),
                        fmt_opt(a.prr.map(|e| e.half_width_95)),
                    ]);
                }
            }
            _ if Some(p.total_gain_dbi) != gain || p.period_s != 60.0 => {}
            n if n.starts_with("dr_") => {
                let shares = a.dr_distribution;
                let mut row = vec![p.altitude_km.to_string(), p.beamwidth_deg.to_string()];
                row.extend((0..6).map(|i| fmt_opt(shares.map(|s| s[i]))));
                row.push(fmt_opt(a.avg_data_rate_bps.map(|e| e.mean)));
                rows.push(row);
            }
            _ => rows.push(vec![
                p.altitude_km.to_string(),
                p.beamwidth_deg.to_string(),
                fmt_opt(a.prr.map(|e| e.mean)),
                fmt_opt(a.prr.map(|e| e.half_width_95)),
            ]),
        }
    }
    rows
}

/// Writes the plot-ready CSVs of `preset` into `dir`. Existing files are
/// only replaced with `force`. Returns the paths written.
pub fn emit_figures_data(result: &SweepResult, preset: Preset, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    let files = preset.figure_files();
    if !force {
        for f in files {
            let path = dir.join(f);
            if path.exists() {
                return Err(Error::WouldOverwrite(path));
            }
        }
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in files {
        let path = dir.join(f);
        let mut w = csv::Writer::from_path(&path)?;
        for row in figure_table(f, result) {
            w.write_record(&row)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
