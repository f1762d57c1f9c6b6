//! Fits the extra link loss that best reproduces the reference DR shares.
//!
//! Run with `cargo run --release --example calibrate_margin`.

use leo_lora::engine::replicate;
use leo_lora::sweep::{figure_base, FIGURE_ALTITUDES_KM};
use leo_lora::channel::AntennaGains;
use leo_lora::Result;

/// Reference DR shares at theta = 5 deg, rows by altitude, columns DR0..DR5.
const TARGET_G5: [[f64; 6]; 6] = [
    [0.0, 0.0, 0.0, 0.05, 0.95, 0.0],
    [0.0, 0.0, 0.29, 0.71, 0.0, 0.0],
    [0.0, 0.08, 0.92, 0.0, 0.0, 0.0],
    [0.07, 0.84, 0.09, 0.0, 0.0, 0.0],
    [0.74, 0.26, 0.0, 0.0, 0.0, 0.0],
    [0.99, 0.01, 0.0, 0.0, 0.0, 0.0],
];
const TARGET_G10: [[f64; 6]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 0.0, 0.0, 0.76, 0.24],
    [0.0, 0.0, 0.0, 0.52, 0.48, 0.0],
    [0.0, 0.0, 0.07, 0.93, 0.0, 0.0],
    [0.0, 0.0, 0.74, 0.26, 0.0, 0.0],
    [0.0, 0.05, 0.94, 0.01, 0.0, 0.0],
];

fn error_at(margin: f64) -> Result<f64> {
    let mut total = 0.0;
    for (gain, target) in [(5.0, &TARGET_G5), (10.0, &TARGET_G10)] {
        for (h, want) in FIGURE_ALTITUDES_KM.iter().zip(target) {
            let mut sc = figure_base();
            sc.channel.extra_margin_db = margin;
            sc.satellite.altitude_km = *h;
            sc.satellite.beamwidth_deg = 5.0;
            sc.gains = AntennaGains::from_total(gain);
            sc.replications = 20;
            sc.duration_s = 60.0;
            let got = replicate(&sc)?.dr_distribution.unwrap_or([0.0; 6]);
            total += got.iter().zip(want).map(|(g, w)| (g - w).powi(2)).sum::<f64>();
        }
    }
    Ok(total)
}

fn main() -> Result<()> {
    let mut best = (f64::INFINITY, 0.0);
    for step in 30..=80 {
        let margin = f64::from(step) / 10.0;
        let err = error_at(margin)?;
        println!("margin {margin:>4.1} dB  squared error {err:.4}");
        if err < best.0 {
            best = (err, margin);
        }
    }
    println!("best margin {:.1} dB (squared error {:.4})", best.1, best.0);
    Ok(())
}
