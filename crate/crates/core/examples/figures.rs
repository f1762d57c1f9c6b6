//! Runs the full figure preset, prints PRR tables and writes plot-ready CSVs.
//!
//! `cargo run --release --example figures -- [out_dir]`

use std::path::PathBuf;
use std::time::Instant;

use leo_lora::sweep::{emit_figures_data, run_sweep, Preset, SweepPoint, FIGURE_ALTITUDES_KM};
use leo_lora::Result;

fn main() -> Result<()> {
    let out: Option<PathBuf> = std::env::args().nth(1).map(PathBuf::from);
    let spec = Preset::All.spec();
    let started = Instant::now();
    let result = run_sweep(&spec, None)?;
    println!("{} points in {:.1?}", spec.len(), started.elapsed());

    let prr = |gain: f64, theta: f64, period: f64, h: f64| {
        let p = SweepPoint { altitude_km: h, beamwidth_deg: theta, total_gain_dbi: gain, period_s: period };
        result.aggregate(&p).and_then(|a| a.prr).map_or(f64::NAN, |e| e.mean)
    };
    for gain in [5.0, 10.0] {
        println!("\nPRR, {gain} dBi, p = 60 s");
        for theta in [5.0, 10.0, 15.0] {
            let row: Vec<String> = FIGURE_ALTITUDES_KM.iter().map(|h| format!("{:.3}", prr(gain, theta, 60.0, *h))).collect();
            println!("theta {theta:>4}: {}", row.join("  "));
        }
    }
    println!("\nPRR, 10 dBi, theta = 10 deg");
    for period in [60.0, 30.0, 10.0] {
        let row: Vec<String> = FIGURE_ALTITUDES_KM.iter().map(|h| format!("{:.3}", prr(10.0, 10.0, period, *h))).collect();
        println!("p {period:>4}: {}", row.join("  "));
    }

    if let Some(dir) = out {
        for path in emit_figures_data(&result, Preset::All, &dir, true)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
