//! Satellite-to-ground channel: free-space loss, ionospheric scintillation,
//! clutter and log-normal shadowing, plus spreading-factor assignment.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometryResult;
use crate::phy::{LoraRateTable, RadioParams, SpreadingFactor};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Latitude above which the scintillation model is not calibrated.
pub const SCINTILLATION_MAX_LATITUDE_DEG: f64 = 20.0;

/// Rural line-of-sight shadowing spread (dB) at elevations 10°, 20°, .., 90°.
pub const RURAL_LOS_SIGMA_DB: [f64; 9] = [1.79, 1.14, 1.14, 0.92, 1.42, 1.56, 0.85, 0.72, 0.72];

/// Shadowing standard deviation, either flat or looked up by elevation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShadowingSigma {
    Constant(f64),
    /// Nine values for elevations 10°..=90° in 10° steps; nearest entry wins.
    ByElevation([f64; 9]),
}

impl ShadowingSigma {
    pub fn at_elevation(&self, elevation_rad: f64) -> f64 {
        match self {
            ShadowingSigma::Constant(s) => *s,
            ShadowingSigma::ByElevation(table) => {
                let bin = (elevation_rad.to_degrees() / 10.0).round().clamp(1.0, 9.0) as usize;
                table[bin - 1]
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            ShadowingSigma::Constant(s) => vec![*s],
            ShadowingSigma::ByElevation(t) => t.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub scintillation_pfluc_db: f64,
    pub clutter_loss_db: f64,
    pub shadowing_sigma_db: ShadowingSigma,
    /// Extra loss subtracted from every received power.
    pub extra_margin_db: f64,
    /// Scenario latitude, only used for the scintillation validity warning.
    pub latitude_deg: Option<f64>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            scintillation_pfluc_db: 1.1,
            clutter_loss_db: 0.0,
            shadowing_sigma_db: ShadowingSigma::Constant(1.79),
            extra_margin_db: 0.0,
            latitude_deg: None,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.scintillation_pfluc_db >= 0.0 && self.scintillation_pfluc_db.is_finite()) {
            return Err(Error::field("scintillation_pfluc_db", "must be >= 0"));
        }
        if !(self.clutter_loss_db >= 0.0 && self.clutter_loss_db.is_finite()) {
            return Err(Error::field("clutter_loss_db", "must be >= 0"));
        }
        if self
            .shadowing_sigma_db
            .values()
            .iter()
            .any(|s| !(*s >= 0.0 && s.is_finite()))
        {
            return Err(Error::field("shadowing_sigma_db", "spread must be >= 0"));
        }
        if !(self.extra_margin_db >= 0.0 && self.extra_margin_db.is_finite()) {
            return Err(Error::field("extra_margin_db", "must be >= 0"));
        }
        if let Some(lat) = self.latitude_deg {
            if !(-90.0..=90.0).contains(&lat) {
                return Err(Error::field("latitude_deg", "must be in [-90, 90]"));
            }
        }
        Ok(())
    }

    /// Non-fatal configuration warnings.
    pub fn warnings(&self) -> Vec<String> {
        match self.latitude_deg {
            Some(lat) if lat.abs() > SCINTILLATION_MAX_LATITUDE_DEG => vec![format!(
                "latitude {lat}° exceeds the {SCINTILLATION_MAX_LATITUDE_DEG}° validity limit of the scintillation model"
            )],
            _ => Vec::new(),
        }
    }
}

pub fn wavelength_m(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT_M_S / carrier_hz
}

/// Free-space path loss in dB for a distance in km.
pub fn fspl(distance_km: f64, carrier_hz: f64) -> Result<f64> {
    if distance_km.is_nan() || distance_km <= 0.0 {
        return Err(Error::Domain(format!("distance {distance_km} km must be > 0")));
    }
    if carrier_hz.is_nan() || carrier_hz <= 0.0 {
        return Err(Error::Domain(format!("carrier {carrier_hz} Hz must be > 0")));
    }
    let d_m = distance_km * 1e3;
    Ok(20.0 * (4.0 * std::f64::consts::PI * d_m / wavelength_m(carrier_hz)).log10())
}

/// Ionospheric scintillation loss scaled from the 4 GHz fluctuation level.
pub fn scintillation_loss(carrier_hz: f64, pfluc_db: f64) -> f64 {
    let ratio = (carrier_hz / 1e9) / 4.0;
    ratio.powf(-1.5) * pfluc_db / std::f64::consts::SQRT_2
}

/// One zero-mean Gaussian draw in dB.
pub fn draw_shadowing<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> f64 {
    // always consume one draw so stream alignment does not depend on sigma
    let z: f64 = rng.sample(StandardNormal);
    if sigma_db == 0.0 {
        0.0
    } else {
        sigma_db * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaGains {
    pub tx_dbi: f64,
    pub rx_dbi: f64,
}

impl AntennaGains {
    /// Only the sum matters; split as an isotropic device plus a gateway antenna.
    pub fn from_total(total_dbi: f64) -> Self {
        AntennaGains {
            tx_dbi: 0.0,
            rx_dbi: total_dbi,
        }
    }

    pub fn total(&self) -> f64 {
        self.tx_dbi + self.rx_dbi
    }
}

impl Default for AntennaGains {
    fn default() -> Self {
        AntennaGains::from_total(5.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub fspl_db: f64,
    pub atmospheric_loss_db: f64,
    pub clutter_loss_db: f64,
    pub shadowing_db: f64,
    pub total_path_loss_db: f64,
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub extra_margin_db: f64,
    pub rx_power_dbm: f64,
    pub wavelength_m: f64,
}

pub fn link_budget(
    geometry: &GeometryResult,
    channel: &ChannelParams,
    radio: &RadioParams,
    gains: AntennaGains,
    shadowing_db: f64,
) -> Result<LinkBudget> {
    let fspl_db = fspl(geometry.slant_range_km, radio.carrier_hz)?;
    let atmospheric_loss_db = scintillation_loss(radio.carrier_hz, channel.scintillation_pfluc_db);
    let total_path_loss_db = fspl_db + atmospheric_loss_db + channel.clutter_loss_db + shadowing_db;
    let rx_power_dbm = radio.tx_power_dbm + gains.tx_dbi + gains.rx_dbi
        - total_path_loss_db
        - channel.extra_margin_db;
    Ok(LinkBudget {
        fspl_db,
        atmospheric_loss_db,
        clutter_loss_db: channel.clutter_loss_db,
        shadowing_db,
        total_path_loss_db,
        tx_power_dbm: radio.tx_power_dbm,
        tx_gain_dbi: gains.tx_dbi,
        rx_gain_dbi: gains.rx_dbi,
        extra_margin_db: channel.extra_margin_db,
        rx_power_dbm,
        wavelength_m: wavelength_m(radio.carrier_hz),
    })
}

/// Result of spreading-factor assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SfAssignment {
    Assigned(SpreadingFactor),
    /// Even SF12 cannot close the link.
    Infeasible,
}

impl SfAssignment {
    pub fn sf(self) -> Option<SpreadingFactor> {
        match self {
            SfAssignment::Assigned(sf) => Some(sf),
            SfAssignment::Infeasible => None,
        }
    }
}

/// Lowest SF whose gateway sensitivity the received power meets.
pub fn assign_sf(rx_power_dbm: f64, table: &LoraRateTable) -> SfAssignment {
    SpreadingFactor::ALL
        .into_iter()
        .find(|&sf| rx_power_dbm >= table.sensitivity(sf))
        .map_or(SfAssignment::Infeasible, SfAssignment::Assigned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geometry_at(d: f64) -> GeometryResult {
        GeometryResult {
            elevation_rad: std::f64::consts::FRAC_PI_2,
            slant_range_km: d,
            coverage_radius_km: 10.0,
            service_area_km2: 314.0,
        }
    }

    #[test]
    fn fspl_values() {
        assert_relative_eq!(fspl(200.0, 868e6).unwrap(), 137.24, epsilon = 0.01);
        assert_relative_eq!(fspl(1931.6, 868e6).unwrap(), 156.94, epsilon = 0.01);
        let diff = fspl(400.0, 868e6).unwrap() - fspl(200.0, 868e6).unwrap();
        assert_relative_eq!(diff, 20.0 * 2f64.log10(), epsilon = 1e-9);
        assert!(fspl(0.0, 868e6).is_err());
        assert!(fspl(-3.0, 868e6).is_err());
    }

    #[test]
    fn scintillation_values() {
        assert_relative_eq!(scintillation_loss(4e9, 1.1), 1.1 / 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(scintillation_loss(868e6, 1.1), 7.69, epsilon = 0.01);
        assert!(scintillation_loss(900e6, 1.1) < scintillation_loss(868e6, 1.1));
    }

    #[test]
    fn latitude_warning() {
        let mut c = ChannelParams::default();
        assert!(c.warnings().is_empty());
        c.latitude_deg = Some(-35.0);
        assert_eq!(c.warnings().len(), 1);
        c.latitude_deg = Some(12.0);
        assert!(c.warnings().is_empty());
    }

    #[test]
    fn shadowing_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!((0..100).all(|_| draw_shadowing(&mut rng, 0.0) == 0.0));
        let draws: Vec<f64> = (0..100_000).map(|_| draw_shadowing(&mut rng, 1.79)).collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 0.02, "{mean}");
        assert!((sd / 1.79 - 1.0).abs() < 0.02, "{sd}");
    }

    #[test]
    fn elevation_table_lookup() {
        let s = ShadowingSigma::ByElevation(RURAL_LOS_SIGMA_DB);
        assert_eq!(s.at_elevation(0.0), 1.79);
        assert_eq!(s.at_elevation(86f64.to_radians()), 0.72);
        assert_eq!(s.at_elevation(44f64.to_radians()), 0.92);
        assert_eq!(ShadowingSigma::Constant(2.0).at_elevation(1.0), 2.0);
    }

    #[test]
    fn link_budget_values() {
        let radio = RadioParams::default();
        let channel = ChannelParams::default();
        let b = link_budget(&geometry_at(200.0), &channel, &radio, AntennaGains::from_total(10.0), 0.0)
            .unwrap();
        assert_relative_eq!(b.rx_power_dbm, -120.93, epsilon = 0.01);
        let b5 = link_budget(&geometry_at(200.0), &channel, &radio, AntennaGains::from_total(5.0), 0.0)
            .unwrap();
        assert_relative_eq!(b5.rx_power_dbm, -125.93, epsilon = 0.01);
        assert_relative_eq!(b.rx_power_dbm - b5.rx_power_dbm, 5.0, epsilon = 1e-12);
        let cl = ChannelParams { clutter_loss_db: 3.0, ..channel.clone() };
        let bc = link_budget(&geometry_at(200.0), &cl, &radio, AntennaGains::from_total(10.0), 0.0)
            .unwrap();
        assert_relative_eq!(b.rx_power_dbm - bc.rx_power_dbm, 3.0, epsilon = 1e-12);
        assert_relative_eq!(b.wavelength_m, SPEED_OF_LIGHT_M_S / 868e6);
        assert!(link_budget(&geometry_at(0.0), &channel, &radio, AntennaGains::default(), 0.0).is_err());
    }

    #[test]
    fn sf_assignment_values() {
        let t = LoraRateTable::default();
        assert_eq!(assign_sf(-120.9, &t), SfAssignment::Assigned(SpreadingFactor::SF7));
        assert_eq!(assign_sf(-131.0, &t), SfAssignment::Assigned(SpreadingFactor::SF8));
        assert_eq!(assign_sf(-130.0, &t), SfAssignment::Assigned(SpreadingFactor::SF7));
        assert_eq!(assign_sf(-142.5, &t), SfAssignment::Assigned(SpreadingFactor::SF12));
        assert_eq!(assign_sf(-143.0, &t), SfAssignment::Infeasible);
    }

    proptest! {
        #[test]
        fn path_loss_parts_sum(d in 1.0..5000.0f64, cl in 0.0..20.0f64, sh in -10.0..10.0f64, g in 0.0..20.0f64) {
            let channel = ChannelParams { clutter_loss_db: cl, ..ChannelParams::default() };
            let radio = RadioParams::default();
            let gains = AntennaGains { tx_dbi: g / 3.0, rx_dbi: g - g / 3.0 };
            let b = link_budget(&geometry_at(d), &channel, &radio, gains, sh).unwrap();
            let sum = b.fspl_db + b.atmospheric_loss_db + b.clutter_loss_db + b.shadowing_db;
            prop_assert!((b.total_path_loss_db - sum).abs() <= 1e-12 * sum.abs().max(1.0));
            let rx = b.tx_power_dbm + b.tx_gain_dbi + b.rx_gain_dbi - b.total_path_loss_db;
            prop_assert!((b.rx_power_dbm - rx).abs() < 1e-9);
        }

        #[test]
        fn assign_sf_monotone(p in -150.0..-110.0f64, drop in 0.0..20.0f64) {
            let t = LoraRateTable::default();
            let rank = |a: SfAssignment| a.sf().map_or(99, |s| s.value());
            prop_assert!(rank(assign_sf(p - drop, &t)) >= rank(assign_sf(p, &t)));
        }

        #[test]
        fn gain_shift_is_linear(d in 100.0..3000.0f64, g in 0.0..15.0f64, delta in 0.0..10.0f64) {
            let channel = ChannelParams::default();
            let radio = RadioParams::default();
            let t = LoraRateTable::default();
            let a = link_budget(&geometry_at(d), &channel, &radio, AntennaGains::from_total(g), 0.0).unwrap();
            let b = link_budget(&geometry_at(d), &channel, &radio, AntennaGains::from_total(g + delta), 0.0).unwrap();
            prop_assert!((b.rx_power_dbm - a.rx_power_dbm - delta).abs() < 1e-9);
            let rank = |a: SfAssignment| a.sf().map_or(99, |s| s.value());
            prop_assert!(rank(assign_sf(b.rx_power_dbm, &t)) <= rank(assign_sf(a.rx_power_dbm, &t)));
        }
    }
}
