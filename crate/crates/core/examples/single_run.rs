//! One replication in detail: devices, SF mix and per-outcome packet counts.

use leo_lora::engine::{self, Scenario};
use leo_lora::sweep::figure_calibration;
use leo_lora::Result;

fn main() -> Result<()> {
    let mut sc = Scenario::default();
    figure_calibration(&mut sc);
    sc.satellite.altitude_km = 700.0;
    sc.satellite.beamwidth_deg = 10.0;

    let run = engine::build(&sc, 0)?;
    println!("{} devices within {:.1} km", run.devices.len(), run.coverage_radius_km);
    for d in run.devices.iter().take(5) {
        println!(
            "  device {:>3}: offset {:>5.1} km  elevation {:>5.2} deg  Prx {:.2} dBm  {:?}  phase {:.2} s",
            d.id,
            d.position.offset_km,
            d.elevation_rad.to_degrees(),
            d.budget.rx_power_dbm,
            d.sf,
            d.phase_s
        );
    }
    let r = engine::run(&run);
    println!("outcomes: {:?}", r.outcomes);
    println!("PRR {:?}  DR shares {:?}  avg rate {:?} bps", r.prr, r.dr_distribution, r.avg_data_rate_bps);

    let agg = engine::replicate(&sc)?;
    if let Some(p) = agg.prr {
        println!("over {} replications: PRR {:.3} +/- {:.3}", p.samples, p.mean, p.half_width_95);
    }
    Ok(())
}
