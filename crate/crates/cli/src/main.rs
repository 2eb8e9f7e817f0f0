//! Command-line front end: run scenarios, analyze frame logs, print presets,
//! serve a fake curtain, and drive a curtain over the wire.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sillsim_core::bridge::{drive, serve_device, CommandResult, DriveOptions};
use sillsim_core::*;

#[derive(Parser)]
#[command(
    name = "sillsim",
    version,
    about = "Closed-loop sill microclimate simulator: plants, humidity, and a deadband-driven curtain"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario; write trace.csv, frames.csv, and summary.txt.
    Run {
        /// Scenario file (INI); defaults to the stock installation.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output directory, created if missing.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Analyze a frame log: motion perceptibility and comfort negotiation.
    Analyze {
        /// frames.csv from a run.
        frames: PathBuf,
        /// Playback speeds to test, ascending.
        #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
        speeds: Vec<u32>,
    },
    /// Print stock species, capture intervals, and the instruction table.
    Presets,
    /// Serve a fake curtain device on a TCP endpoint.
    ServeDevice {
        #[arg(long, default_value = "127.0.0.1:7878")]
        endpoint: String,
        /// Initial opening percentage.
        #[arg(long, default_value_t = 70)]
        initial: i64,
        /// Motion ramp rate, %/s.
        #[arg(long, default_value_t = 2.0)]
        ramp: f64,
    },
    /// Drive a device with scripted sensor readings, one per line.
    Drive {
        #[arg(long, default_value = "127.0.0.1:7878")]
        endpoint: String,
        /// File of readings in %RH, one per line; # starts a comment.
        readings: PathBuf,
        /// Scenario file supplying the controller configuration.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Pace ticks at the controller tick interval in wall-clock time.
        #[arg(long)]
        real_time: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Cmd::Run { scenario, out, seed } => cmd_run(scenario.as_deref(), &out, seed),
        Cmd::Analyze { frames, speeds } => cmd_analyze(&frames, &speeds),
        Cmd::Presets => cmd_presets(),
        Cmd::ServeDevice {
            endpoint,
            initial,
            ramp,
        } => cmd_serve_device(&endpoint, initial, ramp),
        Cmd::Drive {
            endpoint,
            readings,
            scenario,
            real_time,
        } => cmd_drive(&endpoint, &readings, scenario.as_deref(), real_time),
    }
}

fn load_scenario(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading scenario {}", path.display()))?;
            parse_scenario(&text).with_context(|| format!("in scenario {}", path.display()))
        }
    }
}

fn cmd_run(scenario_path: Option<&Path>, out_dir: &Path, seed: Option<u64>) -> Result<()> {
    let mut scenario = load_scenario(scenario_path)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let trace = run_scenario(&scenario)?;

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let write = |name: &str, content: &str| -> Result<PathBuf> {
        let path = out_dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    };
    let trace_path = write("trace.csv", &trace.to_csv())?;
    let frames_path = write("frames.csv", &frames_to_csv(&trace.frames))?;
    let summary_path = write("summary.txt", &summarize(&scenario, &trace)?)?;

    println!("{}", trace_path.display());
    println!("{}", frames_path.display());
    println!("{}", summary_path.display());
    Ok(())
}

fn summarize(scenario: &ScenarioConfig, trace: &SimTrace) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "seed            {}", scenario.seed);
    let _ = writeln!(out, "duration_s      {}", scenario.duration_s);
    let _ = writeln!(out, "sensor_ticks    {}", trace.sensor_log.len());
    let _ = writeln!(out, "frames          {}", trace.frames.len());

    let drops = trace.commands.iter().filter(|c| c.dropped).count();
    let closes = trace
        .commands
        .iter()
        .filter(|c| !c.dropped && c.post_opening_pct < c.pre_opening_pct)
        .count();
    let opens = trace
        .commands
        .iter()
        .filter(|c| !c.dropped && c.post_opening_pct > c.pre_opening_pct)
        .count();
    let _ = writeln!(out, "commands        {}", trace.commands.len());
    let _ = writeln!(out, "  closing       {closes}");
    let _ = writeln!(out, "  opening       {opens}");
    let _ = writeln!(out, "  dropped       {drops}");

    if let (Some(first), Some(last)) = (trace.sensor_log.first(), trace.sensor_log.last()) {
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for s in &trace.sensor_log {
            lo = lo.min(s.rh_true);
            hi = hi.max(s.rh_true);
        }
        let _ = writeln!(out, "rh_start        {:.4}", first.rh_true);
        let _ = writeln!(out, "rh_final        {:.4}", last.rh_true);
        let _ = writeln!(out, "rh_range        [{lo:.4}, {hi:.4}]");
        let _ = writeln!(out, "opening_final   {}", last.opening_pct);
    }

    let report = negotiation_report(&trace.rh_series(), HUMAN_COMFORT_BAND, PLANT_COMFORT_LO)?;
    let _ = writeln!(out);
    let _ = writeln!(out, "comfort occupancy (time-weighted)");
    let _ = writeln!(out, "  human [30-50]  {:.4}", report.occupancy_human);
    let _ = writeln!(out, "  plant (>50)    {:.4}", report.occupancy_plant);
    let _ = writeln!(out, "  contested      {:.4}", report.contested_time);
    Ok(out)
}

fn cmd_analyze(frames_path: &Path, speeds: &[u32]) -> Result<()> {
    if speeds.is_empty() || speeds.windows(2).any(|w| w[0] >= w[1]) {
        bail!("--speeds must be a strictly increasing list");
    }
    let text = std::fs::read_to_string(frames_path)
        .with_context(|| format!("reading frames {}", frames_path.display()))?;
    let frames = frames_from_csv(&text)
        .with_context(|| format!("in frames {}", frames_path.display()))?;
    if frames.is_empty() {
        bail!("frame log {} holds no frames", frames_path.display());
    }

    let report = perceptibility_report(&frames, &PerceptibilityBand::default(), speeds);
    println!("perceptibility at speeds {speeds:?}");
    print!("{}", format_perceptibility_report(&report));

    let series: Vec<(f64, f64)> = frames.iter().map(|f| (f.t_s, f.rh_true)).collect();
    let negotiation = negotiation_report(&series, HUMAN_COMFORT_BAND, PLANT_COMFORT_LO)?;
    println!();
    println!("comfort occupancy (time-weighted)");
    println!("  human [30-50]  {:.4}", negotiation.occupancy_human);
    println!("  plant (>50)    {:.4}", negotiation.occupancy_plant);
    println!("  contested      {:.4}", negotiation.contested_time);
    Ok(())
}

fn cmd_presets() -> Result<()> {
    println!("species");
    for sp in species_presets() {
        println!(
            "  {}  k={} %RH/s  comfort_rh_lo={}",
            sp.name, sp.transp_coeff_k, sp.comfort_rh_lo
        );
        for m in &sp.movements {
            println!(
                "    {}  period={} s  amplitude={}",
                m.label, m.period_s, m.amplitude
            );
        }
    }
    println!(
        "  curtain-sway  period={} s  amplitude=1 (device reference motion)",
        sillsim_core::actuator::CURTAIN_SWAY_PERIOD_S
    );

    println!();
    println!("capture intervals (s)");
    let presets = interval_presets();
    let rendered: Vec<String> = presets.iter().map(|s| s.to_string()).collect();
    println!("  {}", rendered.join(", "));

    println!();
    let cfg = ControllerConfig::default();
    let table = instruction_table(&cfg)?;
    let rendered: Vec<String> = table.iter().map(|p| p.to_string()).collect();
    println!(
        "instruction table ({} positions, {} transitions)",
        table.len(),
        table.len() - 1
    );
    println!("  {}", rendered.join(", "));
    Ok(())
}

fn cmd_serve_device(endpoint: &str, initial: i64, ramp: f64) -> Result<()> {
    let device = CurtainState::new(initial, ramp);
    let server = serve_device(device, endpoint)
        .with_context(|| format!("serving device on {endpoint}"))?;
    println!("listening on {}", server.local_addr());
    // Scripts wait for the endpoint line; don't sit in the buffer.
    use std::io::Write;
    std::io::stdout().flush().ok();
    server.join();
    Ok(())
}

fn read_readings(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading sensor script {}", path.display()))?;
    let mut readings = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line.parse().with_context(|| {
            format!("{}:{}: not a number: {line:?}", path.display(), idx + 1)
        })?;
        if !(0.0..=100.0).contains(&value) {
            bail!("{}:{}: reading {value} out of [0, 100]", path.display(), idx + 1);
        }
        readings.push(value);
    }
    if readings.is_empty() {
        bail!("sensor script {} holds no readings", path.display());
    }
    Ok(readings)
}

fn cmd_drive(
    endpoint: &str,
    readings_path: &Path,
    scenario_path: Option<&Path>,
    real_time: bool,
) -> Result<()> {
    let scenario = load_scenario(scenario_path)?;
    let readings = read_readings(readings_path)?;
    let options = DriveOptions {
        controller: scenario.controller.clone(),
        real_time,
        ..DriveOptions::default()
    };
    let log = drive(&options, readings, endpoint)
        .with_context(|| format!("driving device at {endpoint}"))?;

    let mut sent = 0u32;
    let mut failed = 0u32;
    for r in &log.records {
        let decision = match r.command {
            Command::Hold => "hold".to_owned(),
            Command::SetOpening(pct) => format!("SET {pct}"),
        };
        let outcome = match &r.result {
            CommandResult::NotSent => String::new(),
            CommandResult::Acknowledged(pct) => {
                sent += 1;
                format!(" -> OK {pct}")
            }
            CommandResult::Rejected {
                code,
                device_opening,
            } => {
                failed += 1;
                format!(" -> ERR {code:?}, device at {device_opening}")
            }
            CommandResult::Failed(why) => {
                failed += 1;
                format!(" -> failed: {why}")
            }
        };
        println!(
            "tick {:>4}  t={:>8.1}s  rh={:>6.2}  {decision}{outcome}",
            r.tick, r.t_s, r.reading
        );
    }
    println!(
        "{} ticks, {sent} commands delivered, {failed} failed",
        log.records.len()
    );
    if failed > 0 {
        bail!("{failed} commands failed");
    }
    Ok(())
}
