//! LoRa modulation constants and airtime.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LoRa spreading factor, 7 through 12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SpreadingFactor(u8);

impl SpreadingFactor {
    pub const SF7: Self = SpreadingFactor(7);
    pub const SF8: Self = SpreadingFactor(8);
    pub const SF9: Self = SpreadingFactor(9);
    pub const SF10: Self = SpreadingFactor(10);
    pub const SF11: Self = SpreadingFactor(11);
    pub const SF12: Self = SpreadingFactor(12);

    pub const ALL: [Self; 6] = [
        Self::SF7,
        Self::SF8,
        Self::SF9,
        Self::SF10,
        Self::SF11,
        Self::SF12,
    ];

    pub fn new(sf: u8) -> Result<Self> {
        if (7..=12).contains(&sf) {
            Ok(SpreadingFactor(sf))
        } else {
            Err(Error::Domain(format!("spreading factor {sf} not in 7..=12")))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Row index into SF-indexed tables (SF7 is 0).
    pub fn index(self) -> usize {
        (self.0 - 7) as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// LoRaWAN data-rate index at 125 kHz.
    pub fn dr_index(self) -> u8 {
        12 - self.0
    }

    pub fn from_dr_index(dr: u8) -> Option<Self> {
        (dr <= 5).then(|| SpreadingFactor(12 - dr))
    }
}

impl TryFrom<u8> for SpreadingFactor {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        SpreadingFactor::new(v)
    }
}

impl From<SpreadingFactor> for u8 {
    fn from(sf: SpreadingFactor) -> u8 {
        sf.0
    }
}

impl fmt::Display for SpreadingFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SF{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub sf: SpreadingFactor,
    pub dr_index: u8,
    pub bit_rate_bps: f64,
    pub sensitivity_dbm: f64,
    pub time_on_air_ms_32b: f64,
}

/// Per-SF constants for 125 kHz, 32-byte payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraRateTable {
    rows: [RateRow; 6],
}

const fn row(sf: u8, bit_rate_bps: f64, sensitivity_dbm: f64, toa_ms: f64) -> RateRow {
    RateRow {
        sf: SpreadingFactor(sf),
        dr_index: 12 - sf,
        bit_rate_bps,
        sensitivity_dbm,
        time_on_air_ms_32b: toa_ms,
    }
}

pub const DEFAULT_RATE_ROWS: [RateRow; 6] = [
    row(7, 5470.0, -130.0, 74.0),
    row(8, 3125.0, -132.5, 136.0),
    row(9, 1760.0, -135.0, 247.0),
    row(10, 980.0, -137.5, 493.0),
    row(11, 440.0, -140.0, 888.0),
    row(12, 250.0, -142.5, 1777.0),
];

impl Default for LoraRateTable {
    fn default() -> Self {
        LoraRateTable {
            rows: DEFAULT_RATE_ROWS,
        }
    }
}

impl LoraRateTable {
    pub fn from_rows(rows: [RateRow; 6]) -> Self {
        LoraRateTable { rows }
    }

    pub fn rows(&self) -> &[RateRow; 6] {
        &self.rows
    }

    pub fn row(&self, sf: SpreadingFactor) -> &RateRow {
        &self.rows[sf.index()]
    }

    /// Airtime in seconds for the reference configuration.
    pub fn table_time_on_air(&self, sf: SpreadingFactor) -> f64 {
        self.row(sf).time_on_air_ms_32b / 1000.0
    }

    pub fn nominal_bit_rate(&self, sf: SpreadingFactor) -> f64 {
        self.row(sf).bit_rate_bps
    }

    pub fn sensitivity(&self, sf: SpreadingFactor) -> f64 {
        self.row(sf).sensitivity_dbm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub tx_power_dbm: f64,
    pub payload_bytes: u32,
    pub preamble_symbols: u32,
    pub explicit_header: bool,
    pub crc_on: bool,
    /// 1..=4 for coding rates 4/5 .. 4/8.
    pub coding_rate_index: u8,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            bandwidth_hz: 125e3,
            carrier_hz: 868e6,
            tx_power_dbm: 14.0,
            payload_bytes: 32,
            preamble_symbols: 8,
            explicit_header: true,
            crc_on: true,
            coding_rate_index: 1,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::field("bandwidth_hz", "bandwidth must be > 0"));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::field("carrier_hz", "carrier frequency must be > 0"));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::field("tx_power_dbm", "transmit power must be finite"));
        }
        if self.payload_bytes < 1 {
            return Err(Error::field("payload_bytes", "payload must be at least 1 byte"));
        }
        if !(1..=4).contains(&self.coding_rate_index) {
            return Err(Error::field(
                "coding_rate_index",
                "coding rate index must be in 1..=4",
            ));
        }
        Ok(())
    }
}

/// Frequency sweep rate `B / 2^SF` in Hz.
pub fn chirp_rate(sf: SpreadingFactor, bandwidth_hz: f64) -> f64 {
    bandwidth_hz / f64::from(1u32 << sf.value())
}

pub fn symbol_duration(sf: SpreadingFactor, bandwidth_hz: f64) -> f64 {
    f64::from(1u32 << sf.value()) / bandwidth_hz
}

/// Low data rate optimisation is mandated when a symbol lasts 16 ms or more.
pub fn low_data_rate_optimize(sf: SpreadingFactor, bandwidth_hz: f64) -> bool {
    symbol_duration(sf, bandwidth_hz) >= 16e-3
}

/// Number of symbols after the preamble.
pub fn payload_symbols(params: &RadioParams, sf: SpreadingFactor, payload_bytes: u64) -> Result<u64> {
    let sf_i = i128::from(sf.value());
    let de = i128::from(low_data_rate_optimize(sf, params.bandwidth_hz));
    let ih = i128::from(!params.explicit_header);
    let crc = i128::from(params.crc_on);
    let bits = i128::from(payload_bytes)
        .checked_mul(8)
        .ok_or_else(|| Error::Overflow(format!("{payload_bytes} bytes")))?;
    let numerator = bits - 4 * sf_i + 28 + 16 * crc - 20 * ih;
    let denominator = 4 * (sf_i - 2 * de);
    let blocks = if numerator <= 0 {
        0
    } else {
        (numerator + denominator - 1) / denominator
    };
    let symbols = 8 + blocks * (i128::from(params.coding_rate_index) + 4);
    // f64 keeps integers exact below 2^53
    if symbols > (1i128 << 53) {
        return Err(Error::Overflow(format!(
            "{payload_bytes}-byte payload needs {symbols} symbols"
        )));
    }
    Ok(symbols as u64)
}

/// Generic airtime in seconds.
pub fn computed_time_on_air(params: &RadioParams, sf: SpreadingFactor, payload_bytes: u64) -> Result<f64> {
    let t_sym = symbol_duration(sf, params.bandwidth_hz);
    let preamble = (f64::from(params.preamble_symbols) + 4.25) * t_sym;
    let payload = payload_symbols(params, sf, payload_bytes)? as f64 * t_sym;
    let total = preamble + payload;
    if !total.is_finite() {
        return Err(Error::Overflow(format!("airtime for {payload_bytes} bytes")));
    }
    Ok(total)
}
