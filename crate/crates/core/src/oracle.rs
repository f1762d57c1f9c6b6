//! Brute-force reference implementations used to cross-check the fast paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{self, CaptureMode, ReceptionConfig};
use crate::phy::{LoraRateTable, SpreadingFactor};
use crate::traffic::{Outcome, Transmission};

pub const ORACLE_MAX_TRACE: usize = 50;

/// Quadratic all-pairs reference for gateway reception.
///
/// Returns outcomes in the trace's canonical arrival order alongside the
/// sorted trace itself.
pub fn oracle_receive(
    trace: &[Transmission],
    config: &ReceptionConfig,
    table: &LoraRateTable,
) -> Result<Vec<(Transmission, Outcome)>> {
    if trace.len() > ORACLE_MAX_TRACE {
        return Err(Error::TraceTooLarge {
            len: trace.len(),
            limit: ORACLE_MAX_TRACE,
        });
    }
    let mut sorted = trace.to_vec();
    sorted.sort_by(gateway::arrival_order);

    let mut admitted = vec![false; sorted.len()];
    let mut outcomes: Vec<Option<Outcome>> = vec![None; sorted.len()];
    for i in 0..sorted.len() {
        let t = &sorted[i];
        if t.is_suppressed() {
            outcomes[i] = Some(Outcome::SuppressedDutyCycle);
            continue;
        }
        if t.rx_power_dbm < table.sensitivity(t.sf) {
            outcomes[i] = Some(Outcome::LostSensitivity);
            continue;
        }
        let busy = (0..i)
            .filter(|&j| admitted[j] && sorted[j].arrival_end > t.arrival_start)
            .count();
        admitted[i] = match config.demodulator_paths {
            None => true,
            Some(p) => busy < p as usize,
        };
        if !admitted[i] {
            outcomes[i] = Some(Outcome::LostNoDemodulator);
        }
    }

    for i in 0..sorted.len() {
        if outcomes[i].is_some() {
            continue;
        }
        let t = &sorted[i];
        let mut energy = [0.0f64; 6];
        for (j, o) in sorted.iter().enumerate() {
            if j == i || o.is_suppressed() || o.channel_index != t.channel_index {
                continue;
            }
            let lo = t.arrival_start.max(o.arrival_start);
            let hi = t.arrival_end.min(o.arrival_end);
            if hi <= lo {
                continue;
            }
            let weight = match config.capture_mode {
                CaptureMode::OverlapEnergy => hi - lo,
                CaptureMode::PeakPower => t.airtime,
            };
            energy[o.sf.index()] += 10f64.powf(o.rx_power_dbm / 10.0) * weight;
        }
        let mut ok = true;
        for (g, e) in energy.iter().enumerate() {
            if *e > 0.0 {
                let sir = t.rx_power_dbm - 10.0 * (e / t.airtime).log10();
                if sir < config.isolation.0[t.sf.index()][g] {
                    ok = false;
                }
            }
        }
        outcomes[i] = Some(if ok { Outcome::Received } else { Outcome::LostInterference });
    }

    Ok(sorted
        .into_iter()
        .zip(outcomes)
        .map(|(t, o)| (t, o.expect("every packet classified")))
        .collect())
}

/// Unslotted ALOHA survival probability for periodic equal-power traffic.
pub fn oracle_aloha_prr(n_devices: u64, airtime_s: f64, period_s: f64) -> f64 {
    if n_devices <= 1 {
        return 1.0;
    }
    let p = (1.0 - 2.0 * airtime_s / period_s).max(0.0);
    p.powf((n_devices - 1) as f64)
}

/// Random trace for equivalence fuzzing.
pub fn random_trace<R: Rng + ?Sized>(rng: &mut R, len: usize, table: &LoraRateTable) -> Vec<Transmission> {
    let devices = rng.random_range(1..=len.max(1)) as u32;
    let horizon = rng.random_range(0.5..6.0);
    (0..len)
        .map(|_| {
            let sf = SpreadingFactor::from_index(rng.random_range(0..6)).expect("index < 6");
            let mut t = Transmission::new(
                rng.random_range(0..devices),
                rng.random_range(0.0..horizon),
                table.table_time_on_air(sf),
                sf,
                rng.random_range(0..2),
                rng.random_range(0.0..0.01),
                rng.random_range(-145.0..-105.0),
            );
            if rng.random_bool(0.05) {
                t.outcome = Some(Outcome::SuppressedDutyCycle);
            }
            t
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub traces: usize,
    pub packets: usize,
    pub disagreements: usize,
}

/// Compares [`gateway::resolve_trace`] with [`oracle_receive`] on random traces.
pub fn fuzz_equivalence(
    traces: usize,
    max_packets: usize,
    seed: u64,
    config: &ReceptionConfig,
    table: &LoraRateTable,
) -> Result<FuzzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport {
        traces,
        packets: 0,
        disagreements: 0,
    };
    for _ in 0..traces {
        let len = rng.random_range(0..=max_packets);
        let trace = random_trace(&mut rng, len, table);
        let expected = oracle_receive(&trace, config, table)?;
        let mut fast = trace;
        gateway::resolve_trace(&mut fast, table, config);
        report.packets += fast.len();
        report.disagreements += fast
            .iter()
            .zip(&expected)
            .filter(|(f, (t, o))| f.device_id != t.device_id || f.start_tx != t.start_tx || f.outcome != Some(*o))
            .count();
    }
    Ok(report)
}
