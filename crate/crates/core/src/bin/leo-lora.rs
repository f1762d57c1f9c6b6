//! Command-line front end. Values come from built-in defaults, then the
//! config file, then flags; later sources win.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use leo_lora::channel::AntennaGains;
use leo_lora::config;
use leo_lora::engine::Scenario;
use leo_lora::gateway::ReceptionConfig;
use leo_lora::oracle;
use leo_lora::phy::{self, LoraRateTable, RadioParams, SpreadingFactor};
use leo_lora::sweep::{self, OutputFormat, Preset, SweepSpec};
use leo_lora::{Error, Result};

#[derive(Parser)]
#[command(name = "leo-lora", version, about = "LoRa uplink simulator for LEO satellite gateways")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate the cross-product of the sweep axes in a config file
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        output: OutputArgs,
        /// Worker threads (default: all cores)
        #[arg(long)]
        workers: Option<usize>,
        /// Print the plan without running
        #[arg(long)]
        dry_run: bool,
    },
    /// List or run the built-in figure configurations
    Presets {
        /// Preset to run; lists presets when omitted
        name: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        dry_run: bool,
        /// Also write plot-ready CSVs into this directory
        #[arg(long)]
        figures: Option<PathBuf>,
        /// Replace existing figure files
        #[arg(long)]
        force: bool,
    },
    /// Cross-check the gateway against the brute-force oracle
    Verify {
        #[arg(long, default_value_t = 1000)]
        traces: usize,
        #[arg(long, default_value_t = 20)]
        max_packets: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Time on air of one packet
    Toa {
        #[arg(long)]
        sf: u8,
        #[arg(long, default_value_t = 32)]
        payload_bytes: u64,
        #[arg(long, default_value_t = 125e3)]
        bandwidth_hz: f64,
        #[arg(long, default_value_t = 8)]
        preamble_symbols: u32,
        #[arg(long, default_value_t = 1)]
        coding_rate_index: u8,
        #[arg(long)]
        implicit_header: bool,
        #[arg(long)]
        no_crc: bool,
    },
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    altitude_km: Option<f64>,
    #[arg(long)]
    beamwidth_deg: Option<f64>,
    #[arg(long)]
    total_gain_dbi: Option<f64>,
    #[arg(long)]
    period_s: Option<f64>,
    #[arg(long)]
    density_per_km2: Option<f64>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    replications: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Apply the channel plan and loss calibration of the figure presets
    #[arg(long)]
    figure_calibration: bool,
}

#[derive(Args)]
struct OutputArgs {
    /// Write results here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Emit only aggregate rows
    #[arg(long)]
    summary: bool,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format `{other}`, expected csv or json")),
    }
}

impl Overrides {
    fn apply_scenario(&self, sc: &mut Scenario) {
        if self.figure_calibration {
            sweep::figure_calibration(sc);
        }
        if let Some(v) = self.altitude_km {
            sc.satellite.altitude_km = v;
        }
        if let Some(v) = self.beamwidth_deg {
            sc.satellite.beamwidth_deg = v;
        }
        if let Some(v) = self.total_gain_dbi {
            sc.gains = AntennaGains::from_total(v);
        }
        if let Some(v) = self.period_s {
            sc.period_s = v;
        }
        if let Some(v) = self.density_per_km2 {
            sc.density_per_km2 = v;
        }
        if let Some(v) = self.duration_s {
            sc.duration_s = v;
        }
        if let Some(v) = self.replications {
            sc.replications = v;
        }
        if let Some(v) = self.seed {
            sc.base_seed = v;
        }
    }

    /// Axis flags pin the corresponding axis to one value.
    fn apply_sweep(&self, spec: &mut SweepSpec) -> Result<()> {
        self.apply_scenario(&mut spec.base);
        if let Some(v) = self.altitude_km {
            spec.altitudes_km = vec![v];
        }
        if let Some(v) = self.beamwidth_deg {
            spec.beamwidths_deg = vec![v];
        }
        if let Some(v) = self.total_gain_dbi {
            spec.total_gains_dbi = vec![v];
        }
        if let Some(v) = self.period_s {
            spec.periods_s = vec![v];
        }
        spec.base.validate()?;
        spec.validate()
    }
}

/// Runs `spec`, writes the rows and reports whether any point failed.
fn execute(spec: &SweepSpec, out: &OutputArgs, workers: Option<usize>) -> Result<bool> {
    for w in spec.base.warnings() {
        eprintln!("warning: {w}");
    }
    let result = sweep::run_sweep(spec, workers)?;
    let mut rows = result.rows(spec.base.base_seed);
    if out.summary {
        rows.retain(|r| r.is_aggregate());
    }
    let format = out.format.unwrap_or(spec.format);
    match out.output.as_ref().or(spec.output.as_ref()) {
        Some(path) => sweep::write_rows(&rows, format, File::create(path)?)?,
        None => sweep::write_rows(&rows, format, io::stdout().lock())?,
    }
    let failed = result.failures();
    if failed > 0 {
        eprintln!("{failed} of {} sweep points failed", spec.len());
    }
    Ok(failed > 0)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, overrides, output } => {
            let mut sc = match &config {
                Some(path) => config::load_scenario(path)?,
                None => Scenario::default(),
            };
            overrides.apply_scenario(&mut sc);
            sc.validate()?;
            execute(&SweepSpec::single(sc), &output, None)
        }
        Command::Sweep { config, overrides, output, workers, dry_run } => {
            let mut spec = config::load_sweep(&config)?;
            overrides.apply_sweep(&mut spec)?;
            if dry_run {
                print!("{}", spec.plan());
                return Ok(false);
            }
            execute(&spec, &output, workers)
        }
        Command::Presets { name, overrides, output, workers, dry_run, figures, force } => {
            let Some(name) = name else {
                for p in Preset::ALL {
                    println!("{:<10} {:>4} points  {}", p.name(), p.spec().len(), p.describe());
                }
                return Ok(false);
            };
            let preset = Preset::from_name(&name)?;
            let mut spec = preset.spec();
            overrides.apply_sweep(&mut spec)?;
            if dry_run {
                print!("{}", spec.plan());
                return Ok(false);
            }
            if let Some(dir) = &figures {
                if !force {
                    if let Some(f) = preset.figure_files().iter().map(|f| dir.join(f)).find(|p| p.exists()) {
                        return Err(Error::WouldOverwrite(f));
                    }
                }
            }
            let result = sweep::run_sweep(&spec, workers)?;
            let mut rows = result.rows(spec.base.base_seed);
            if output.summary {
                rows.retain(|r| r.is_aggregate());
            }
            let format = output.format.unwrap_or(spec.format);
            match &output.output {
                Some(path) => sweep::write_rows(&rows, format, File::create(path)?)?,
                None => sweep::write_rows(&rows, format, io::stdout().lock())?,
            }
            if let Some(dir) = &figures {
                for path in sweep::emit_figures_data(&result, preset, dir, force)? {
                    eprintln!("wrote {}", path.display());
                }
            }
            Ok(result.failures() > 0)
        }
        Command::Verify { traces, max_packets, seed } => {
            let table = LoraRateTable::default();
            let mut stdout = io::stdout().lock();
            let mut clean = true;
            for config in [
                ReceptionConfig::default(),
                ReceptionConfig { demodulator_paths: Some(1), ..ReceptionConfig::default() },
                ReceptionConfig {
                    capture_mode: leo_lora::gateway::CaptureMode::PeakPower,
                    ..ReceptionConfig::default()
                },
            ] {
                let r = oracle::fuzz_equivalence(traces, max_packets, seed, &config, &table)?;
                writeln!(
                    stdout,
                    "paths={:?} capture={:?}: {} traces, {} packets, {} disagreements",
                    config.demodulator_paths, config.capture_mode, r.traces, r.packets, r.disagreements
                )?;
                clean &= r.disagreements == 0;
            }
            if !clean {
                return Err(Error::Domain("oracle disagreement".into()));
            }
            Ok(false)
        }
        Command::Toa { sf, payload_bytes, bandwidth_hz, preamble_symbols, coding_rate_index, implicit_header, no_crc } => {
            let sf = SpreadingFactor::new(sf)?;
            let params = RadioParams {
                bandwidth_hz,
                preamble_symbols,
                coding_rate_index,
                explicit_header: !implicit_header,
                crc_on: !no_crc,
                ..RadioParams::default()
            };
            params.validate()?;
            let toa = phy::computed_time_on_air(&params, sf, payload_bytes)?;
            println!(
                "{sf} {payload_bytes} B: {:.3} ms ({} payload symbols, low data rate optimization {})",
                toa * 1e3,
                phy::payload_symbols(&params, sf, payload_bytes)?,
                if phy::low_data_rate_optimize(sf, bandwidth_hz) { "on" } else { "off" }
            );
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
