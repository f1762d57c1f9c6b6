//! Class-A end devices: periodic unconfirmed uplinks, unslotted channel
//! access and the optional duty-cycle lockout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{LinkBudget, SfAssignment};
use crate::error::{Error, Result};
use crate::geometry::GroundPosition;
use crate::phy::SpreadingFactor;

pub type DeviceId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndDevice {
    pub id: DeviceId,
    pub position: GroundPosition,
    pub elevation_rad: f64,
    pub slant_range_km: f64,
    pub budget: LinkBudget,
    pub sf: SfAssignment,
    pub period_s: f64,
    /// First transmission time, in `[0, period_s)`.
    pub phase_s: f64,
}

impl EndDevice {
    /// One-way propagation delay to the satellite.
    pub fn propagation_delay_s(&self) -> f64 {
        self.slant_range_km * 1e3 / crate::channel::SPEED_OF_LIGHT_M_S
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Received,
    LostSensitivity,
    LostInterference,
    LostNoDemodulator,
    SuppressedDutyCycle,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::Received,
        Outcome::LostSensitivity,
        Outcome::LostInterference,
        Outcome::LostNoDemodulator,
        Outcome::SuppressedDutyCycle,
    ];
}

/// One uplink packet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub device_id: DeviceId,
    pub start_tx: f64,
    pub airtime: f64,
    pub sf: SpreadingFactor,
    pub channel_index: usize,
    pub arrival_start: f64,
    pub arrival_end: f64,
    pub rx_power_dbm: f64,
    /// `None` until the gateway has resolved the packet.
    pub outcome: Option<Outcome>,
}

impl Transmission {
    pub fn new(
        device_id: DeviceId,
        start_tx: f64,
        airtime: f64,
        sf: SpreadingFactor,
        channel_index: usize,
        propagation_delay_s: f64,
        rx_power_dbm: f64,
    ) -> Self {
        let arrival_start = start_tx + propagation_delay_s;
        Transmission {
            device_id,
            start_tx,
            airtime,
            sf,
            channel_index,
            arrival_start,
            arrival_end: arrival_start + airtime,
            rx_power_dbm,
            outcome: None,
        }
    }

    pub fn is_suppressed(&self) -> bool {
        self.outcome == Some(Outcome::SuppressedDutyCycle)
    }
}

/// Uniform phase on `[0, period_s)`.
pub fn draw_phase<R: Rng + ?Sized>(rng: &mut R, period_s: f64) -> f64 {
    let u: f64 = rng.random();
    (u * period_s).min(period_s * (1.0 - f64::EPSILON))
}

/// Start times `phase, phase + p, ..` strictly before `duration_s`.
pub fn schedule_traffic(phase_s: f64, period_s: f64, duration_s: f64) -> Result<Vec<f64>> {
    if !(period_s > 0.0 && period_s.is_finite()) {
        return Err(Error::field("period_s", "period must be > 0"));
    }
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = phase_s + k as f64 * period_s;
        if t >= duration_s {
            break;
        }
        out.push(t);
        k += 1;
    }
    Ok(out)
}

/// Regulatory airtime cap.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DutyCycle {
    #[default]
    Off,
    Limit(f64),
}

impl DutyCycle {
    pub fn validate(&self) -> Result<()> {
        match self {
            DutyCycle::Off => Ok(()),
            DutyCycle::Limit(f) if *f > 0.0 && *f <= 1.0 => Ok(()),
            DutyCycle::Limit(_) => Err(Error::field("duty_cycle", "limit must be in (0, 1]")),
        }
    }

    /// Silent period after a transmission of `airtime` seconds.
    pub fn lockout_s(&self, airtime: f64) -> f64 {
        match self {
            DutyCycle::Off => 0.0,
            DutyCycle::Limit(f) => airtime * (1.0 / f - 1.0),
        }
    }
}

/// Marks one device's transmissions that fall inside a lockout window.
///
/// `transmissions` must belong to a single device and be ordered by start time.
pub fn apply_duty_cycle(transmissions: &mut [Transmission], duty_cycle: DutyCycle) {
    if duty_cycle == DutyCycle::Off {
        return;
    }
    let mut next_allowed = f64::NEG_INFINITY;
    for tx in transmissions.iter_mut() {
        if tx.start_tx < next_allowed {
            tx.outcome = Some(Outcome::SuppressedDutyCycle);
        } else {
            next_allowed = tx.start_tx + tx.airtime + duty_cycle.lockout_s(tx.airtime);
        }
    }
}

/// Uniform channel pick from a non-empty plan.
pub fn channel_select<R: Rng + ?Sized>(rng: &mut R, plan_len: usize) -> Result<usize> {
    if plan_len == 0 {
        return Err(Error::field("channels_hz", "channel plan must not be empty"));
    }
    // consumes exactly one draw regardless of plan size
    let u: f64 = rng.random();
    Ok(((u * plan_len as f64) as usize).min(plan_len - 1))
}
