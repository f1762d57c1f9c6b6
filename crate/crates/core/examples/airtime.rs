//! Computed time on air against the reference per-SF table.

use leo_lora::phy::{self, LoraRateTable, RadioParams, SpreadingFactor};
use leo_lora::Result;

fn main() -> Result<()> {
    let params = RadioParams::default();
    let table = LoraRateTable::default();
    println!("SF  DR  table_ms  computed_ms  deviation  LDRO");
    for sf in SpreadingFactor::ALL {
        let computed = phy::computed_time_on_air(&params, sf, u64::from(params.payload_bytes))? * 1e3;
        let tabled = table.table_time_on_air(sf) * 1e3;
        println!(
            "{:>2}  {:>2}  {tabled:>8.0}  {computed:>11.3}  {:>+8.1}%  {}",
            sf.value(),
            sf.dr_index(),
            100.0 * (computed - tabled) / tabled,
            phy::low_data_rate_optimize(sf, params.bandwidth_hz)
        );
    }
    for bytes in [8u64, 51, 222] {
        let t = phy::computed_time_on_air(&params, SpreadingFactor::SF12, bytes)?;
        println!("SF12 with {bytes} B: {:.1} ms", t * 1e3);
    }
    Ok(())
}
