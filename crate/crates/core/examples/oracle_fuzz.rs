//! Fuzzes the window-sweep gateway against the quadratic reference.

use leo_lora::gateway::{CaptureMode, ReceptionConfig};
use leo_lora::oracle::fuzz_equivalence;
use leo_lora::phy::LoraRateTable;
use leo_lora::Result;

fn main() -> Result<()> {
    let table = LoraRateTable::default();
    for paths in [Some(8), Some(2), None] {
        for capture_mode in [CaptureMode::OverlapEnergy, CaptureMode::PeakPower] {
            let cfg = ReceptionConfig { demodulator_paths: paths, capture_mode, ..ReceptionConfig::default() };
            let r = fuzz_equivalence(1000, 20, 7, &cfg, &table)?;
            println!("paths {paths:?} {capture_mode:?}: {} packets, {} disagreements", r.packets, r.disagreements);
        }
    }
    Ok(())
}
