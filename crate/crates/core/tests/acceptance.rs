//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance`

use std::time::{Duration, Instant};

use leo_lora::channel::{self, AntennaGains, ChannelParams, ShadowingSigma};
use leo_lora::engine::{build, replicate, run, Scenario};
use leo_lora::gateway::{CaptureMode, ReceptionConfig};
use leo_lora::geometry::{self, GroundPosition, SatelliteConfig};
use leo_lora::metrics;
use leo_lora::oracle::{fuzz_equivalence, oracle_aloha_prr};
use leo_lora::phy::{self, LoraRateTable, RadioParams, SpreadingFactor};
use leo_lora::sweep::{figure_base, run_sweep, write_csv, Preset, SweepPoint};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Check = fn() -> (bool, String);

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

fn geometry_exactness() -> (bool, String) {
    let n = |h: f64, theta: f64| {
        let sat = SatelliteConfig::new(h, theta).unwrap();
        geometry::device_count(0.01, geometry::service_area(geometry::coverage_radius(&sat).unwrap())).expected
    };
    let a = n(500.0, 10.0);
    let b = n(700.0, 15.0);
    let ok = (a - 60.1165).abs() / 60.1165 <= 1e-3 && (b - 267.0).abs() / 267.0 <= 1e-2;
    (ok, format!("N(500 km, 10 deg) = {a:.4} (60.1165 +/- 0.1%), N(700 km, 15 deg) = {b:.2} (267 +/- 1%)"))
}

fn table_fidelity() -> (bool, String) {
    let expected: [(u8, u8, f64, f64, f64); 6] = [
        (7, 5, 5470.0, -130.0, 74.0),
        (8, 4, 3125.0, -132.5, 136.0),
        (9, 3, 1760.0, -135.0, 247.0),
        (10, 2, 980.0, -137.5, 493.0),
        (11, 1, 440.0, -140.0, 888.0),
        (12, 0, 250.0, -142.5, 1777.0),
    ];
    let t = LoraRateTable::default();
    let verbatim = t.rows().iter().zip(expected).all(|(r, (sf, dr, rate, sens, toa))| {
        r.sf.value() == sf
            && r.dr_index == dr
            && r.bit_rate_bps == rate
            && r.sensitivity_dbm == sens
            && r.time_on_air_ms_32b == toa
    });
    let params = RadioParams::default();
    let worst = SpreadingFactor::ALL
        .iter()
        .map(|&sf| {
            let c = phy::computed_time_on_air(&params, sf, 32).unwrap();
            ((c - t.table_time_on_air(sf)) / t.table_time_on_air(sf)).abs()
        })
        .fold(0.0, f64::max);
    (
        verbatim && worst <= 0.15,
        format!("30 table constants verbatim: {verbatim}; worst computed airtime deviation {:.1}% (<= 15%)", worst * 100.0),
    )
}

fn link_budget_points() -> (bool, String) {
    let fspl = channel::fspl(200.0, 868e6).unwrap();
    let la = channel::scintillation_loss(868e6, 1.1);
    let sat = SatelliteConfig::new(700.0, 15.0).unwrap();
    let geo = geometry::locate(&sat, &GroundPosition { offset_km: 40.0, azimuth_rad: 1.0 }).unwrap();
    let ch = ChannelParams { clutter_loss_db: 2.5, extra_margin_db: 1.25, ..ChannelParams::default() };
    let radio = RadioParams::default();
    let gains = AntennaGains { tx_dbi: 2.0, rx_dbi: 3.0 };
    let b = channel::link_budget(&geo, &ch, &radio, gains, -0.75).unwrap();
    let sum = b.fspl_db + b.atmospheric_loss_db + b.clutter_loss_db + b.shadowing_db;
    let additive = b.total_path_loss_db == sum
        && b.rx_power_dbm == radio.tx_power_dbm + gains.tx_dbi + gains.rx_dbi - sum - ch.extra_margin_db;
    (
        (fspl - 137.24).abs() <= 0.01 && (la - 7.69).abs() <= 0.01 && additive,
        format!("FSPL(200 km) = {fspl:.4} dB, L_a = {la:.4} dB, additivity exact: {additive}"),
    )
}

fn gain10_dr() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for (label, mut sc) in [("library defaults", Scenario::default()), ("figure calibration", figure_base())] {
        sc.gains = AntennaGains::from_total(10.0);
        sc.satellite.altitude_km = 200.0;
        for theta in [5.0, 10.0, 15.0] {
            sc.satellite.beamwidth_deg = theta;
            for rep in 0..sc.replications {
                let r = run(&build(&sc, rep).unwrap());
                let all7 = r.dr_distribution == Some([0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
                    && r.avg_data_rate_bps == Some(5470.0);
                if !all7 {
                    ok = false;
                    notes.push(format!("{label} theta {theta} rep {rep} not all SF7"));
                }
            }
        }
    }
    let mut sc = figure_base();
    sc.gains = AntennaGains::from_total(10.0);
    sc.satellite.altitude_km = 700.0;
    sc.satellite.beamwidth_deg = 5.0;
    let shares = replicate(&sc).unwrap().dr_distribution.unwrap();
    let modal = (0..6).max_by(|&a, &b| shares[a].total_cmp(&shares[b])).unwrap();
    ok &= modal == 2;
    notes.push(format!(
        "h=200: every device SF7 at 5470 bps; h=700 modal DR {modal} (shares {:?})",
        shares.map(|s| (s * 1000.0).round() / 1000.0)
    ));
    (ok, notes.join("; "))
}

fn prr_bands() -> (bool, String) {
    let started = Instant::now();
    let spec = Preset::All.spec();
    let res = run_sweep(&spec, None).unwrap();
    let elapsed = started.elapsed();
    let prr = |gain: f64, theta: f64, period: f64, h: f64| {
        let p = SweepPoint { altitude_km: h, beamwidth_deg: theta, total_gain_dbi: gain, period_s: period };
        res.aggregate(&p).unwrap().prr.unwrap().mean
    };
    let low = [prr(5.0, 5.0, 60.0, 200.0), prr(5.0, 5.0, 60.0, 300.0)];
    let mid = prr(5.0, 5.0, 60.0, 700.0);
    let wide = prr(5.0, 15.0, 60.0, 700.0);
    let load = [prr(10.0, 10.0, 60.0, 700.0), prr(10.0, 10.0, 30.0, 700.0), prr(10.0, 10.0, 10.0, 700.0)];
    let checks = [
        low.iter().all(|&p| p >= 0.98),
        (mid - 0.69).abs() <= 0.10,
        wide <= 0.15,
        load[0] > load[1] && load[1] > load[2],
        elapsed < Duration::from_secs(120),
    ];
    (
        checks.iter().all(|&c| c),
        format!(
            "g5 theta5 h200/h300 = {:.3}/{:.3} (>= 0.98): {}; g5 theta5 h700 = {mid:.3} (0.69 +/- 0.10): {}; g5 theta15 h700 = {wide:.3} (<= 0.15): {}; g10 theta10 h700 p60/30/10 = {:.3}/{:.3}/{:.3} strictly decreasing: {}; full sweep {:.1?} (< 2 min): {}",
            low[0], low[1], checks[0], checks[1], checks[2], load[0], load[1], load[2], checks[3], elapsed, checks[4]
        ),
    )
}

/// The h <= 300 km cells hold 2 and 5 devices with fixed phases, so a single
/// overlapping pair moves a 10-replication mean by several percent. Reported
/// alongside the band, not counted.
fn small_cell_expectation() -> String {
    let mut parts = Vec::new();
    for h in [200.0, 300.0] {
        let mut sc = figure_base();
        sc.satellite = SatelliteConfig::new(h, 5.0).unwrap();
        sc.replications = 2000;
        let e = replicate(&sc).unwrap().prr.unwrap();
        parts.push(format!("g5 theta5 h{h} over 2000 replications = {:.4} +/- {:.4}", e.mean, e.half_width_95));
    }
    parts.join("; ")
}

fn oracle_equivalence() -> (bool, String) {
    let r = fuzz_equivalence(1000, 20, 2024, &ReceptionConfig::default(), &LoraRateTable::default()).unwrap();
    (
        r.disagreements == 0 && r.traces == 1000,
        format!("{} traces, {} packets, {} disagreements", r.traces, r.packets, r.disagreements),
    )
}

fn aloha_sanity() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, sf, period) in [(5u64, SpreadingFactor::SF8, 60.0), (20, SpreadingFactor::SF10, 60.0), (50, SpreadingFactor::SF12, 30.0)] {
        let mut sc = Scenario::default();
        sc.fixed_device_count = Some(n);
        sc.forced_sf = Some(sf);
        sc.period_s = period;
        sc.replications = 50;
        sc.gains = AntennaGains::from_total(20.0);
        sc.channel.shadowing_sigma_db = ShadowingSigma::Constant(0.0);
        sc.reception.capture_mode = CaptureMode::PeakPower;
        let est = replicate(&sc).unwrap().prr.unwrap();
        let want = oracle_aloha_prr(n, sc.airtime(sf).unwrap(), period);
        let dev = (est.mean - want).abs();
        let within = dev <= 3.0 * est.std_error() || dev == 0.0;
        ok &= within;
        parts.push(format!("({n}, {sf}, {period}): {:.4} vs {want:.4}, {:.2} SE", est.mean, dev / est.std_error()));
    }
    (ok, parts.join("; "))
}

fn property_suites() -> (bool, String) {
    let mut runner = TestRunner::new(Config { cases: 64, failure_persistence: None, ..Config::default() });
    let strategy = (150.0..900.0f64, 1.0..25.0f64, 5.0..120.0f64, any::<u32>(), 0.0..3.0f64);
    let result = runner.run(&strategy, |(h, theta, p, seed, sigma)| {
        let mut sc = figure_base();
        sc.satellite = SatelliteConfig::new(h, theta).unwrap();
        sc.period_s = p;
        sc.base_seed = u64::from(seed);
        sc.channel.shadowing_sigma_db = ShadowingSigma::Constant(sigma);
        let m = build(&sc, 0).unwrap();
        let r = run(&m);
        // conservation, determinism, convex bound, disk containment
        prop_assert_eq!(r.outcomes.total(), m.trace.len() as u64);
        prop_assert!(r.received <= r.sent);
        prop_assert_eq!(run(&build(&sc, 0).unwrap()), r.clone());
        if let Some(shares) = r.dr_distribution {
            let rate = metrics::avg_data_rate(&shares, &sc.rate_table);
            prop_assert!((250.0..=5470.0).contains(&rate));
        }
        prop_assert!(m.devices.iter().all(|d| d.position.offset_km <= m.coverage_radius_km));
        // slant range grows as elevation falls
        let el: Vec<(f64, f64)> = m.devices.iter().map(|d| (d.elevation_rad, d.slant_range_km)).collect();
        for (a, b) in el.iter().zip(el.iter().skip(1)) {
            if a.0 > b.0 {
                prop_assert!(a.1 <= b.1 + 1e-9);
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => (true, "64 random scenarios: conservation, determinism, convex avg-rate bound, disk containment, range monotonicity".into()),
        Err(e) => (false, format!("property violated: {e}")),
    }
}

fn reproducibility() -> (bool, String) {
    let mut ok = true;
    for preset in Preset::ALL {
        let spec = preset.spec();
        let csv = || {
            let mut buf = Vec::new();
            write_csv(&run_sweep(&spec, None).unwrap().rows(spec.base.base_seed), &mut buf).unwrap();
            buf
        };
        ok &= csv() == csv();
    }
    (ok, "two runs of each of the five presets give byte-identical CSV".into())
}

fn main() {
    let mut report = Report { failed: 0 };
    let criteria: [(u32, Check); 9] = [
        (1, geometry_exactness),
        (2, table_fidelity),
        (3, link_budget_points),
        (4, gain10_dr),
        (5, prr_bands),
        (6, oracle_equivalence),
        (7, aloha_sanity),
        (8, property_suites),
        (9, reproducibility),
    ];
    for (id, check) in criteria {
        let (ok, detail) = check();
        report.line(id, ok, detail);
        if id == 5 {
            println!("INFO criterion 5: {}", small_cell_expectation());
        }
    }
    println!("{} of {} criteria passed", criteria.len() - report.failed, criteria.len());
    if report.failed > 0 {
        std::process::exit(1);
    }
}
