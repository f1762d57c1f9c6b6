//! Spherical-Earth geometry of a single satellite footprint.
//!
//! The satellite sits at the zenith of the footprint centre. Ground positions
//! are described by their great-circle offset from the sub-satellite point and
//! an azimuth; the link budget only needs the resulting elevation angle and
//! slant range.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteConfig {
    pub altitude_km: f64,
    pub beamwidth_deg: f64,
    pub earth_radius_km: f64,
}

impl SatelliteConfig {
    pub fn new(altitude_km: f64, beamwidth_deg: f64) -> Result<Self> {
        let sat = SatelliteConfig {
            altitude_km,
            beamwidth_deg,
            earth_radius_km: EARTH_RADIUS_KM,
        };
        sat.validate()?;
        Ok(sat)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_km > 0.0 && self.altitude_km.is_finite()) {
            return Err(Error::field("altitude_km", "altitude must be > 0"));
        }
        if !(self.beamwidth_deg > 0.0 && self.beamwidth_deg < 180.0) {
            return Err(Error::field(
                "beamwidth_deg",
                "beamwidth must be in (0, 180)",
            ));
        }
        if !(self.earth_radius_km > 0.0 && self.earth_radius_km.is_finite()) {
            return Err(Error::field("earth_radius_km", "earth radius must be > 0"));
        }
        Ok(())
    }

    /// Great-circle distance from the sub-satellite point to the geometric horizon.
    pub fn horizon_offset_km(&self) -> f64 {
        let re = self.earth_radius_km;
        re * (re / (re + self.altitude_km)).acos()
    }
}

/// Polar position inside the footprint disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPosition {
    pub offset_km: f64,
    pub azimuth_rad: f64,
}

impl GroundPosition {
    /// Earth-centred Cartesian coordinates (km) with the sub-satellite point on the +z axis.
    pub fn to_ecef_km(&self, earth_radius_km: f64) -> [f64; 3] {
        let gamma = self.offset_km / earth_radius_km;
        [
            earth_radius_km * gamma.sin() * self.azimuth_rad.cos(),
            earth_radius_km * gamma.sin() * self.azimuth_rad.sin(),
            earth_radius_km * gamma.cos(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryResult {
    pub elevation_rad: f64,
    pub slant_range_km: f64,
    pub coverage_radius_km: f64,
    pub service_area_km2: f64,
}

/// Footprint radius `tan(θ/2)·h`.
pub fn coverage_radius(sat: &SatelliteConfig) -> Result<f64> {
    if !(sat.beamwidth_deg >= 0.0 && sat.beamwidth_deg < 180.0) {
        return Err(Error::Domain(format!(
            "beamwidth {}° outside [0, 180)",
            sat.beamwidth_deg
        )));
    }
    Ok((sat.beamwidth_deg.to_radians() / 2.0).tan() * sat.altitude_km)
}

pub fn service_area(coverage_radius_km: f64) -> f64 {
    PI * coverage_radius_km * coverage_radius_km
}

/// Number of devices in a service area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceCount {
    pub expected: f64,
    pub count: u64,
}

/// `ρ·A` rounded to nearest, ties up.
pub fn device_count(density_per_km2: f64, area_km2: f64) -> DeviceCount {
    let expected = (density_per_km2 * area_km2).max(0.0);
    DeviceCount {
        expected,
        count: (expected + 0.5).floor() as u64,
    }
}

pub fn slant_range_from_elevation(sat: &SatelliteConfig, elevation_rad: f64) -> f64 {
    let re = sat.earth_radius_km;
    let h = sat.altitude_km;
    let s = elevation_rad.sin();
    (re * re * s * s + h * h + 2.0 * h * re).sqrt() - re * s
}

/// Law-of-cosines distance between a ground point and the satellite.
pub fn chord_distance(sat: &SatelliteConfig, offset_km: f64) -> f64 {
    let re = sat.earth_radius_km;
    let rs = re + sat.altitude_km;
    let gamma = offset_km / re;
    (re * re + rs * rs - 2.0 * re * rs * gamma.cos()).sqrt()
}

pub fn elevation_from_offset(sat: &SatelliteConfig, pos: &GroundPosition) -> Result<f64> {
    let horizon = sat.horizon_offset_km();
    if pos.offset_km < 0.0 || pos.offset_km > horizon * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "offset {} km outside [0, {horizon}] km visible from {} km",
            pos.offset_km, sat.altitude_km
        )));
    }
    let re = sat.earth_radius_km;
    let gamma = pos.offset_km / re;
    let alpha = (gamma.cos() - re / (re + sat.altitude_km)).atan2(gamma.sin());
    Ok(alpha.clamp(0.0, FRAC_PI_2))
}

/// Full geometry for one ground position.
pub fn locate(sat: &SatelliteConfig, pos: &GroundPosition) -> Result<GeometryResult> {
    let coverage_radius_km = coverage_radius(sat)?;
    let elevation_rad = elevation_from_offset(sat, pos)?;
    Ok(GeometryResult {
        elevation_rad,
        slant_range_km: slant_range_from_elevation(sat, elevation_rad),
        coverage_radius_km,
        service_area_km2: service_area(coverage_radius_km),
    })
}

/// `n` positions uniform over a disk of radius `coverage_radius_km`.
pub fn sample_positions<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    coverage_radius_km: f64,
) -> Vec<GroundPosition> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            GroundPosition {
                offset_km: coverage_radius_km * u.sqrt(),
                azimuth_rad: TAU * v,
            }
        })
        .collect()
}
