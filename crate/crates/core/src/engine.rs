//! Scenario materialization, the arrival-window sweep and replication.
//!
//! Every random quantity comes from a named substream of a ChaCha8 generator
//! seeded with the scenario's base seed; the stream id combines the
//! replication index with the substream, so changing one knob never shifts
//! the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, AntennaGains, ChannelParams, SfAssignment};
use crate::error::{Error, Result};
use crate::gateway::{self, ReceptionConfig};
use crate::geometry::{self, DeviceCount, SatelliteConfig};
use crate::metrics::{self, DrShares};
use crate::phy::{self, LoraRateTable, RadioParams, SpreadingFactor};
use crate::traffic::{self, DutyCycle, EndDevice, Outcome, Transmission};

/// EU868 mandatory uplink channels.
pub const EU868_DEFAULT_CHANNELS_HZ: [f64; 3] = [868.1e6, 868.3e6, 868.5e6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AirtimeModel {
    /// Fixed per-SF airtimes of the 32-byte reference configuration.
    #[default]
    Table,
    /// Airtime from the radio parameters and payload size.
    Computed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub satellite: SatelliteConfig,
    pub channel: ChannelParams,
    pub radio: RadioParams,
    pub gains: AntennaGains,
    pub rate_table: LoraRateTable,
    pub density_per_km2: f64,
    /// Overrides the density-derived device count.
    pub fixed_device_count: Option<u64>,
    /// Skips sensitivity-based assignment and puts every device on one SF.
    pub forced_sf: Option<SpreadingFactor>,
    pub period_s: f64,
    pub duration_s: f64,
    pub replications: u32,
    pub base_seed: u64,
    pub reception: ReceptionConfig,
    pub duty_cycle: DutyCycle,
    pub channels_hz: Vec<f64>,
    pub airtime_model: AirtimeModel,
    /// Whether duty-cycle suppressed packets count towards the PRR denominator.
    pub count_suppressed_as_sent: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            satellite: SatelliteConfig {
                altitude_km: 500.0,
                beamwidth_deg: 10.0,
                earth_radius_km: geometry::EARTH_RADIUS_KM,
            },
            channel: ChannelParams::default(),
            radio: RadioParams::default(),
            gains: AntennaGains::default(),
            rate_table: LoraRateTable::default(),
            density_per_km2: 0.01,
            fixed_device_count: None,
            forced_sf: None,
            period_s: 60.0,
            duration_s: 600.0,
            replications: 10,
            base_seed: 1,
            reception: ReceptionConfig::default(),
            duty_cycle: DutyCycle::Off,
            channels_hz: vec![868e6],
            airtime_model: AirtimeModel::Table,
            count_suppressed_as_sent: true,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.satellite.validate()?;
        self.channel.validate()?;
        self.radio.validate()?;
        self.reception.validate()?;
        self.duty_cycle.validate()?;
        if !(self.density_per_km2 >= 0.0 && self.density_per_km2.is_finite()) {
            return Err(Error::field("density_per_km2", "density must be >= 0"));
        }
        if !(self.period_s > 0.0 && self.period_s.is_finite()) {
            return Err(Error::field("period_s", "period must be > 0"));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::field("duration_s", "duration must be > 0"));
        }
        if self.replications < 1 {
            return Err(Error::field("replications", "need at least one replication"));
        }
        if self.channels_hz.is_empty() {
            return Err(Error::field("channels_hz", "channel plan must not be empty"));
        }
        if self.channels_hz.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(Error::field("channels_hz", "channel frequencies must be > 0"));
        }
        if !self.gains.tx_dbi.is_finite() || !self.gains.rx_dbi.is_finite() {
            return Err(Error::field("total_gain_dbi", "gains must be finite"));
        }
        for r in self.rate_table.rows() {
            if !(r.bit_rate_bps > 0.0 && r.time_on_air_ms_32b > 0.0 && r.sensitivity_dbm.is_finite()) {
                return Err(Error::field(
                    "rate_table",
                    format!("{} row needs positive rate/airtime and finite sensitivity", r.sf),
                ));
            }
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.channel.warnings();
        if let DutyCycle::Limit(f) = self.duty_cycle {
            let worst = self.airtime(SpreadingFactor::SF12).unwrap_or(0.0);
            if worst / self.period_s > f {
                w.push(format!(
                    "duty cycle {f} cannot sustain SF12 traffic every {} s; some packets will be suppressed",
                    self.period_s
                ));
            }
        }
        w
    }

    pub fn airtime(&self, sf: SpreadingFactor) -> Result<f64> {
        match self.airtime_model {
            AirtimeModel::Table => Ok(self.rate_table.table_time_on_air(sf)),
            AirtimeModel::Computed => {
                phy::computed_time_on_air(&self.radio, sf, u64::from(self.radio.payload_bytes))
            }
        }
    }

    pub fn coverage_radius_km(&self) -> Result<f64> {
        geometry::coverage_radius(&self.satellite)
    }

    pub fn device_count(&self) -> Result<DeviceCount> {
        let area = geometry::service_area(self.coverage_radius_km()?);
        let mut n = geometry::device_count(self.density_per_km2, area);
        if let Some(fixed) = self.fixed_device_count {
            n.count = fixed;
        }
        Ok(n)
    }
}

/// Independent random substreams of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    Placement = 0,
    Shadowing = 1,
    Phases = 2,
    Channels = 3,
}

pub fn substream(base_seed: u64, replication: u32, stream: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream((u64::from(replication) << 8) | stream as u64);
    rng
}

/// Everything about one replication that is fixed before the first packet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterializedRun {
    pub scenario: Scenario,
    pub replication: u32,
    pub coverage_radius_km: f64,
    pub device_count: DeviceCount,
    pub devices: Vec<EndDevice>,
    /// Generated uplinks ordered by device, then start time.
    pub trace: Vec<Transmission>,
}

pub fn build(scenario: &Scenario, replication: u32) -> Result<MaterializedRun> {
    scenario.validate()?;
    let coverage_radius_km = scenario.coverage_radius_km()?;
    let device_count = scenario.device_count()?;
    let n = usize::try_from(device_count.count)
        .map_err(|_| Error::field("density_per_km2", "device count does not fit in memory"))?;

    let mut placement = substream(scenario.base_seed, replication, Substream::Placement);
    let mut shadowing = substream(scenario.base_seed, replication, Substream::Shadowing);
    let mut phases = substream(scenario.base_seed, replication, Substream::Phases);

    let positions = geometry::sample_positions(&mut placement, n, coverage_radius_km);
    let mut devices = Vec::with_capacity(n);
    for (id, position) in positions.into_iter().enumerate() {
        let geo = geometry::locate(&scenario.satellite, &position)?;
        let sigma = scenario.channel.shadowing_sigma_db.at_elevation(geo.elevation_rad);
        let shadow = channel::draw_shadowing(&mut shadowing, sigma);
        let budget = channel::link_budget(&geo, &scenario.channel, &scenario.radio, scenario.gains, shadow)?;
        let sf = match scenario.forced_sf {
            Some(sf) => SfAssignment::Assigned(sf),
            None => channel::assign_sf(budget.rx_power_dbm, &scenario.rate_table),
        };
        let phase_s = traffic::draw_phase(&mut phases, scenario.period_s);
        devices.push(EndDevice {
            id: id as u32,
            position,
            elevation_rad: geo.elevation_rad,
            slant_range_km: geo.slant_range_km,
            budget,
            sf,
            period_s: scenario.period_s,
            phase_s,
        });
    }

    let mut run = MaterializedRun {
        scenario: scenario.clone(),
        replication,
        coverage_radius_km,
        device_count,
        devices,
        trace: Vec::new(),
    };
    run.reschedule()?;
    Ok(run)
}

impl MaterializedRun {
    /// Regenerates the uplink trace from the current device list.
    pub fn reschedule(&mut self) -> Result<()> {
        let sc = &self.scenario;
        let mut channels = substream(sc.base_seed, self.replication, Substream::Channels);
        let mut trace = Vec::new();
        for dev in &self.devices {
            let Some(sf) = dev.sf.sf() else { continue };
            let airtime = sc.airtime(sf)?;
            let delay = dev.propagation_delay_s();
            let mut own: Vec<Transmission> = Vec::new();
            for start in traffic::schedule_traffic(dev.phase_s, dev.period_s, sc.duration_s)? {
                let ch = traffic::channel_select(&mut channels, sc.channels_hz.len())?;
                own.push(Transmission::new(dev.id, start, airtime, sf, ch, delay, dev.budget.rx_power_dbm));
            }
            traffic::apply_duty_cycle(&mut own, sc.duty_cycle);
            trace.extend(own);
        }
        self.trace = trace;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub received: u64,
    pub lost_sensitivity: u64,
    pub lost_interference: u64,
    pub lost_no_demodulator: u64,
    pub suppressed_duty_cycle: u64,
}

impl OutcomeCounts {
    pub fn tally<'a, I: IntoIterator<Item = &'a Transmission>>(trace: I) -> Self {
        let mut c = OutcomeCounts::default();
        for t in trace {
            match t.outcome.expect("resolved trace") {
                Outcome::Received => c.received += 1,
                Outcome::LostSensitivity => c.lost_sensitivity += 1,
                Outcome::LostInterference => c.lost_interference += 1,
                Outcome::LostNoDemodulator => c.lost_no_demodulator += 1,
                Outcome::SuppressedDutyCycle => c.suppressed_duty_cycle += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.received
            + self.lost_sensitivity
            + self.lost_interference
            + self.lost_no_demodulator
            + self.suppressed_duty_cycle
    }

    fn add(&mut self, o: &OutcomeCounts) {
        self.received += o.received;
        self.lost_sensitivity += o.lost_sensitivity;
        self.lost_interference += o.lost_interference;
        self.lost_no_demodulator += o.lost_no_demodulator;
        self.suppressed_duty_cycle += o.suppressed_duty_cycle;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub replication: u32,
    pub seed: u64,
    pub device_count: u64,
    pub expected_device_count: f64,
    pub coverage_radius_km: f64,
    pub served_devices: u64,
    /// Share of devices no SF can serve; `None` without devices.
    pub infeasible_share: Option<f64>,
    pub generated: u64,
    pub sent: u64,
    pub received: u64,
    pub outcomes: OutcomeCounts,
    pub prr: Option<f64>,
    pub dr_distribution: Option<DrShares>,
    pub avg_data_rate_bps: Option<f64>,
    pub goodput_bps: f64,
}

/// Resolves every packet and computes the replication's metrics.
pub fn run(materialized: &MaterializedRun) -> RunResult {
    let sc = &materialized.scenario;
    let mut trace = materialized.trace.clone();
    gateway::resolve_trace(&mut trace, &sc.rate_table, &sc.reception);
    let outcomes = OutcomeCounts::tally(&trace);
    let generated = outcomes.total();
    let sent = if sc.count_suppressed_as_sent {
        generated
    } else {
        generated - outcomes.suppressed_duty_cycle
    };
    let served: Vec<SpreadingFactor> = materialized.devices.iter().filter_map(|d| d.sf.sf()).collect();
    let n = materialized.devices.len() as u64;
    let m = metrics::MetricSet::compute(sent, outcomes.received, served.iter().copied(), &sc.rate_table);
    RunResult {
        replication: materialized.replication,
        seed: sc.base_seed,
        device_count: n,
        expected_device_count: materialized.device_count.expected,
        coverage_radius_km: materialized.coverage_radius_km,
        served_devices: served.len() as u64,
        infeasible_share: (n > 0).then(|| (n - served.len() as u64) as f64 / n as f64),
        generated,
        sent,
        received: outcomes.received,
        outcomes,
        prr: m.prr,
        dr_distribution: m.dr_distribution,
        avg_data_rate_bps: m.avg_data_rate_bps,
        goodput_bps: metrics::goodput_bps(outcomes.received, sc.radio.payload_bytes, sc.duration_s),
    }
}

/// Sample mean with a normal-approximation 95 % half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let half_width_95 = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            1.96 * (var / n).sqrt()
        } else {
            0.0
        };
        Some(Estimate {
            mean,
            half_width_95,
            samples: xs.len(),
        })
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.half_width_95 / 1.96
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub runs: Vec<RunResult>,
    pub device_count: u64,
    pub expected_device_count: f64,
    pub coverage_radius_km: f64,
    pub sent: u64,
    pub received: u64,
    pub outcomes: OutcomeCounts,
    pub prr: Option<Estimate>,
    pub dr_distribution: Option<DrShares>,
    pub avg_data_rate_bps: Option<Estimate>,
    pub infeasible_share: Option<f64>,
    pub goodput_bps: Estimate,
}

impl AggregateResult {
    pub fn from_runs(runs: Vec<RunResult>) -> Self {
        let first = runs.first().expect("at least one replication");
        let mut outcomes = OutcomeCounts::default();
        for r in &runs {
            outcomes.add(&r.outcomes);
        }
        let prrs: Vec<f64> = runs.iter().filter_map(|r| r.prr).collect();
        let rates: Vec<f64> = runs.iter().filter_map(|r| r.avg_data_rate_bps).collect();
        let shares: Vec<DrShares> = runs.iter().filter_map(|r| r.dr_distribution).collect();
        let dr_distribution = (!shares.is_empty()).then(|| {
            let mut mean = [0.0; 6];
            for s in &shares {
                for (m, v) in mean.iter_mut().zip(s) {
                    *m += v;
                }
            }
            mean.map(|m| m / shares.len() as f64)
        });
        let infeasible: Vec<f64> = runs.iter().filter_map(|r| r.infeasible_share).collect();
        let goodput: Vec<f64> = runs.iter().map(|r| r.goodput_bps).collect();
        AggregateResult {
            device_count: first.device_count,
            expected_device_count: first.expected_device_count,
            coverage_radius_km: first.coverage_radius_km,
            sent: runs.iter().map(|r| r.sent).sum(),
            received: runs.iter().map(|r| r.received).sum(),
            outcomes,
            prr: Estimate::from_samples(&prrs),
            dr_distribution,
            avg_data_rate_bps: Estimate::from_samples(&rates),
            infeasible_share: Estimate::from_samples(&infeasible).map(|e| e.mean),
            goodput_bps: Estimate::from_samples(&goodput).expect("non-empty"),
            runs,
        }
    }
}

/// Runs every replication (in parallel) and aggregates in replication order.
pub fn replicate(scenario: &Scenario) -> Result<AggregateResult> {
    scenario.validate()?;
    let runs = (0..scenario.replications)
        .into_par_iter()
        .map(|r| build(scenario, r).map(|m| run(&m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AggregateResult::from_runs(runs))
}
