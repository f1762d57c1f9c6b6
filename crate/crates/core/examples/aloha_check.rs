//! Simulated PRR of a homogeneous single-SF cell against the unslotted ALOHA closed form.

use leo_lora::engine::{replicate, Scenario};
use leo_lora::gateway::CaptureMode;
use leo_lora::channel::{AntennaGains, ShadowingSigma};
use leo_lora::oracle::oracle_aloha_prr;
use leo_lora::phy::SpreadingFactor;
use leo_lora::Result;

fn main() -> Result<()> {
    for (n, sf, period) in [(5u64, SpreadingFactor::SF8, 60.0), (20, SpreadingFactor::SF10, 60.0), (50, SpreadingFactor::SF12, 30.0)] {
        let mut sc = Scenario::default();
        sc.fixed_device_count = Some(n);
        sc.forced_sf = Some(sf);
        sc.period_s = period;
        sc.replications = 50;
        sc.channel.shadowing_sigma_db = ShadowingSigma::Constant(0.0);
        // strong enough that every forced SF clears sensitivity
        sc.gains = AntennaGains::from_total(20.0);
        sc.reception.capture_mode = CaptureMode::PeakPower;
        let agg = replicate(&sc)?;
        let est = agg.prr.expect("packets were sent");
        let expected = oracle_aloha_prr(n, sc.airtime(sf)?, period);
        println!(
            "n={n:>2} {sf} p={period:>2}: simulated {:.4} +/- {:.4}, closed form {expected:.4}, {:.2} SE apart",
            est.mean,
            est.half_width_95,
            (est.mean - expected).abs() / est.std_error()
        );
    }
    Ok(())
}
