//! Received power and assigned SF from the sub-satellite point to the beam edge.

use leo_lora::channel::{self, AntennaGains, ChannelParams};
use leo_lora::geometry::{self, GroundPosition, SatelliteConfig};
use leo_lora::phy::{LoraRateTable, RadioParams};
use leo_lora::Result;

fn main() -> Result<()> {
    let sat = SatelliteConfig::new(700.0, 15.0)?;
    let radio = RadioParams::default();
    let ch = ChannelParams::default();
    let table = LoraRateTable::default();
    let rc = geometry::coverage_radius(&sat)?;
    for gain in [5.0, 10.0] {
        println!("total gain {gain} dBi, h = {} km, theta = {} deg", sat.altitude_km, sat.beamwidth_deg);
        for step in 0..=4 {
            let pos = GroundPosition { offset_km: rc * f64::from(step) / 4.0, azimuth_rad: 0.0 };
            let geo = geometry::locate(&sat, &pos)?;
            let b = channel::link_budget(&geo, &ch, &radio, AntennaGains::from_total(gain), 0.0)?;
            let sf = channel::assign_sf(b.rx_power_dbm, &table)
                .sf()
                .map_or("none".to_string(), |s| s.to_string());
            println!(
                "  offset {:>6.1} km  d {:>7.1} km  FSPL {:.2} dB  La {:.2} dB  Prx {:.2} dBm  {sf}",
                pos.offset_km, geo.slant_range_km, b.fspl_db, b.atmospheric_loss_db, b.rx_power_dbm
            );
        }
    }
    Ok(())
}
