//! Beam footprint, device count and edge-of-beam geometry over the figure grid.

use leo_lora::geometry::{self, GroundPosition, SatelliteConfig};
use leo_lora::sweep::{FIGURE_ALTITUDES_KM, FIGURE_BEAMWIDTHS_DEG};
use leo_lora::Result;

fn main() -> Result<()> {
    let density = 0.01;
    println!("{:>6} {:>6} {:>10} {:>9} {:>8} {:>10}", "h_km", "theta", "R_c_km", "N", "edge_el", "edge_d_km");
    for theta in FIGURE_BEAMWIDTHS_DEG {
        for h in FIGURE_ALTITUDES_KM {
            let sat = SatelliteConfig::new(h, theta)?;
            let rc = geometry::coverage_radius(&sat)?;
            let n = geometry::device_count(density, geometry::service_area(rc));
            let edge = geometry::locate(&sat, &GroundPosition { offset_km: rc, azimuth_rad: 0.0 })?;
            println!(
                "{h:>6} {theta:>6} {rc:>10.2} {:>9.2} {:>8.2} {:>10.2}",
                n.expected,
                edge.elevation_rad.to_degrees(),
                edge.slant_range_km
            );
        }
    }
    Ok(())
}
