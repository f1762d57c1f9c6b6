//! Packet reception at the satellite gateway.
//!
//! A packet is resolved through three gates, in order:
//!
//! 1. sensitivity: received power must reach the SF's sensitivity;
//! 2. demodulator admission: a free receive path must exist when the
//!    preamble arrives (greedy, arrival order, ties by device id);
//! 3. interference: for every interferer SF group the signal-to-interference
//!    ratio, with interference energy averaged over the target's airtime,
//!    must reach the isolation threshold for that SF pair.
//!
//! Every transmitted packet interferes, including packets that failed the
//! sensitivity or admission gates. Duty-cycle suppressed packets never left
//! the device and are ignored.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::{LoraRateTable, SpreadingFactor};
use crate::traffic::{Outcome, Transmission};

/// Required SIR in dB, indexed `[desired SF][interferer SF]` from SF7.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolationMatrix(pub [[f64; 6]; 6]);

/// Co-channel rejection thresholds of Goursaud and Gorce, as used by the
/// ns-3 LoRaWAN module.
pub const GOURSAUD_ISOLATION_DB: [[f64; 6]; 6] = [
    [6.0, -16.0, -18.0, -19.0, -19.0, -20.0],
    [-24.0, 6.0, -20.0, -22.0, -22.0, -22.0],
    [-27.0, -27.0, 6.0, -23.0, -25.0, -25.0],
    [-30.0, -30.0, -30.0, 6.0, -26.0, -28.0],
    [-33.0, -33.0, -33.0, -33.0, 6.0, -29.0],
    [-36.0, -36.0, -36.0, -36.0, -36.0, 6.0],
];

impl Default for IsolationMatrix {
    fn default() -> Self {
        IsolationMatrix(GOURSAUD_ISOLATION_DB)
    }
}

impl IsolationMatrix {
    pub fn threshold(&self, desired: SpreadingFactor, interferer: SpreadingFactor) -> f64 {
        self.0[desired.index()][interferer.index()]
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().flatten().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::field("isolation_db", "all thresholds must be finite"))
        }
    }
}

/// How overlapping interferers are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaptureMode {
    /// Interferer energy is power times overlap duration, averaged over the
    /// target's airtime.
    #[default]
    OverlapEnergy,
    /// Any overlap counts at the interferer's full power.
    PeakPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceptionConfig {
    pub isolation: IsolationMatrix,
    /// `None` disables the admission gate.
    pub demodulator_paths: Option<u32>,
    pub capture_mode: CaptureMode,
}

impl Default for ReceptionConfig {
    fn default() -> Self {
        ReceptionConfig {
            isolation: IsolationMatrix::default(),
            demodulator_paths: Some(8),
            capture_mode: CaptureMode::default(),
        }
    }
}

impl ReceptionConfig {
    pub fn validate(&self) -> Result<()> {
        self.isolation.validate()?;
        if self.demodulator_paths == Some(0) {
            return Err(Error::field("demodulator_paths", "need at least one path"));
        }
        Ok(())
    }
}

/// Length of the intersection of two arrival windows (0 when disjoint).
pub fn overlap_duration(a: &Transmission, b: &Transmission) -> f64 {
    (a.arrival_end.min(b.arrival_end) - a.arrival_start.max(b.arrival_start)).max(0.0)
}

fn same_packet(a: &Transmission, b: &Transmission) -> bool {
    a.device_id == b.device_id && a.start_tx == b.start_tx
}

fn interferes(target: &Transmission, other: &Transmission) -> bool {
    !other.is_suppressed()
        && other.channel_index == target.channel_index
        && other.arrival_start < target.arrival_end
        && other.arrival_end > target.arrival_start
        && !same_packet(target, other)
}

/// Same-channel transmissions whose arrival window intersects the target's.
pub fn overlap_set<'a>(target: &Transmission, all: &'a [Transmission]) -> Vec<&'a Transmission> {
    all.iter().filter(|o| interferes(target, o)).collect()
}

pub(crate) fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Per interferer-SF interference power, equalized over the target airtime (mW).
pub fn equalized_interference<'a, I>(target: &Transmission, overlappers: I, mode: CaptureMode) -> [f64; 6]
where
    I: IntoIterator<Item = &'a Transmission>,
{
    let mut energy = [0.0f64; 6];
    for o in overlappers {
        let weight = match mode {
            CaptureMode::OverlapEnergy => overlap_duration(target, o),
            CaptureMode::PeakPower => target.airtime,
        };
        energy[o.sf.index()] += dbm_to_mw(o.rx_power_dbm) * weight;
    }
    energy.map(|e| e / target.airtime)
}

/// True when the target survives every interferer group.
pub fn interference_verdict<'a, I>(
    target: &Transmission,
    overlappers: I,
    isolation: &IsolationMatrix,
    mode: CaptureMode,
) -> bool
where
    I: IntoIterator<Item = &'a Transmission>,
{
    let groups = equalized_interference(target, overlappers, mode);
    groups.iter().enumerate().all(|(g, &interference)| {
        if interference <= 0.0 {
            return true;
        }
        let sir_db = target.rx_power_dbm - 10.0 * interference.log10();
        let interferer = SpreadingFactor::from_index(g).expect("six SF groups");
        sir_db >= isolation.threshold(target.sf, interferer)
    })
}

/// Greedy admission over arrivals already ordered by arrival start.
pub fn demodulator_admission(arrivals: &[&Transmission], paths: Option<u32>) -> Vec<bool> {
    let Some(paths) = paths else {
        return vec![true; arrivals.len()];
    };
    let mut busy_until: BinaryHeap<Reverse<OrdF64>> = BinaryHeap::new();
    arrivals
        .iter()
        .map(|tx| {
            while busy_until
                .peek()
                .is_some_and(|Reverse(end)| end.0 <= tx.arrival_start)
            {
                busy_until.pop();
            }
            if busy_until.len() < paths as usize {
                busy_until.push(Reverse(OrdF64(tx.arrival_end)));
                true
            } else {
                false
            }
        })
        .collect()
}

/// Outcome of one packet once admission and overlap are known.
pub fn receive<'a, I>(
    target: &Transmission,
    sensitivity_dbm: f64,
    admitted: bool,
    overlappers: I,
    config: &ReceptionConfig,
) -> Outcome
where
    I: IntoIterator<Item = &'a Transmission>,
{
    if target.rx_power_dbm < sensitivity_dbm {
        Outcome::LostSensitivity
    } else if !admitted {
        Outcome::LostNoDemodulator
    } else if interference_verdict(target, overlappers, &config.isolation, config.capture_mode) {
        Outcome::Received
    } else {
        Outcome::LostInterference
    }
}

/// Canonical processing order: arrival start, then device id, then send time.
pub fn arrival_order(a: &Transmission, b: &Transmission) -> Ordering {
    a.arrival_start
        .total_cmp(&b.arrival_start)
        .then(a.device_id.cmp(&b.device_id))
        .then(a.start_tx.total_cmp(&b.start_tx))
}

/// Resolves every non-suppressed packet of a trace in place.
///
/// The trace is sorted into arrival order first.
pub fn resolve_trace(trace: &mut [Transmission], table: &LoraRateTable, config: &ReceptionConfig) {
    trace.sort_by(arrival_order);
    let live: Vec<usize> = (0..trace.len()).filter(|&i| !trace[i].is_suppressed()).collect();

    let candidates: Vec<usize> = live
        .iter()
        .copied()
        .filter(|&i| trace[i].rx_power_dbm >= table.sensitivity(trace[i].sf))
        .collect();
    let admitted_flags = {
        let refs: Vec<&Transmission> = candidates.iter().map(|&i| &trace[i]).collect();
        demodulator_admission(&refs, config.demodulator_paths)
    };
    let mut admitted = vec![false; trace.len()];
    for (&i, ok) in candidates.iter().zip(admitted_flags) {
        admitted[i] = ok;
    }

    let max_airtime = live.iter().map(|&i| trace[i].airtime).fold(0.0, f64::max);
    let mut outcomes = Vec::with_capacity(live.len());
    for (pos, &i) in live.iter().enumerate() {
        let target = &trace[i];
        // overlappers start after target.start − max_airtime and before target.end
        let lo = live[..pos].partition_point(|&j| trace[j].arrival_start <= target.arrival_start - max_airtime);
        let hi = pos + live[pos..].partition_point(|&j| trace[j].arrival_start < target.arrival_end);
        let overlappers = live[lo..hi]
            .iter()
            .map(|&j| &trace[j])
            .filter(|o| interferes(target, o));
        let outcome = receive(target, table.sensitivity(target.sf), admitted[i], overlappers, config);
        outcomes.push((i, outcome));
    }
    for (i, outcome) in outcomes {
        trace[i].outcome = Some(outcome);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}
