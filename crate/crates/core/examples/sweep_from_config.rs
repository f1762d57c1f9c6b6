//! Loads a flat TOML sweep, prints its plan and writes the aggregate rows as CSV.

use leo_lora::config;
use leo_lora::sweep::{run_sweep, write_csv};
use leo_lora::Result;

const SWEEP: &str = r#"
total_gain_dbi = 10
density_per_km2 = 0.02
replications = 4
channels_hz = [868.1e6, 868.3e6, 868.5e6]
sweep_altitude_km = [300, 500, 700]
sweep_period_s = [60, 20]
"#;

fn main() -> Result<()> {
    let spec = config::parse_sweep(SWEEP)?;
    print!("{}", spec.plan());
    let result = run_sweep(&spec, Some(2))?;
    let rows: Vec<_> = result.rows(spec.base.base_seed).into_iter().filter(|r| r.is_aggregate()).collect();
    write_csv(&rows, std::io::stdout().lock())?;
    println!("\nround-tripped scenario:\n{}", config::emit_scenario(&spec.base));
    Ok(())
}
