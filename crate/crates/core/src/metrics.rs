//! Evaluation quantities computed from run outcomes.

use serde::{Deserialize, Serialize};

use crate::phy::{LoraRateTable, SpreadingFactor};

/// Share of served devices per DR index, `shares[dr]`.
pub type DrShares = [f64; 6];

/// Packet reception ratio; `None` when nothing was sent.
pub fn prr(sent: u64, received: u64) -> Option<f64> {
    debug_assert!(received <= sent);
    (sent > 0).then(|| received as f64 / sent as f64)
}

/// DR shares over the given served-device SFs; `None` if the list is empty.
pub fn dr_distribution<I>(served: I) -> Option<DrShares>
where
    I: IntoIterator<Item = SpreadingFactor>,
{
    let mut counts = [0u64; 6];
    let mut total = 0u64;
    for sf in served {
        counts[sf.dr_index() as usize] += 1;
        total += 1;
    }
    (total > 0).then(|| counts.map(|c| c as f64 / total as f64))
}

/// Share-weighted nominal bit rate in bit/s.
pub fn avg_data_rate(shares: &DrShares, table: &LoraRateTable) -> f64 {
    shares
        .iter()
        .enumerate()
        .map(|(dr, share)| {
            let sf = SpreadingFactor::from_dr_index(dr as u8).expect("dr index in 0..6");
            share * table.nominal_bit_rate(sf)
        })
        .sum()
}

/// Received payload bits per simulated second.
pub fn goodput_bps(received: u64, payload_bytes: u32, duration_s: f64) -> f64 {
    received as f64 * f64::from(payload_bytes) * 8.0 / duration_s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub prr: Option<f64>,
    pub dr_distribution: Option<DrShares>,
    pub avg_data_rate_bps: Option<f64>,
    pub sent: u64,
    pub received: u64,
}

impl MetricSet {
    pub fn compute<I>(sent: u64, received: u64, served: I, table: &LoraRateTable) -> Self
    where
        I: IntoIterator<Item = SpreadingFactor>,
    {
        let dr_distribution = dr_distribution(served);
        MetricSet {
            prr: prr(sent, received),
            avg_data_rate_bps: dr_distribution.as_ref().map(|s| avg_data_rate(s, table)),
            dr_distribution,
            sent,
            received,
        }
    }
}
