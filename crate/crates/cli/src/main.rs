//! `xphase`: config-driven runner for the extended phase-space experiments.

mod commands;
mod config;

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use xphase_core::Result;

#[derive(Parser)]
#[command(name = "xphase", version, about = "Extended phase-space dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; omitted fields take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for stochastic steps (overrides `seed`).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override a config field by dotted path, e.g. `integrator.rel_tol=1e-8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Suppress the summary line.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Clone)]
struct WithLevels {
    #[command(flatten)]
    common: Common,
    /// Number of eigenpairs (overrides `spectrum.levels`).
    #[arg(long, value_name = "N")]
    levels: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; writes trajectory.csv and events.json.
    Simulate(Common),
    /// CCM flip interval against Im E; writes uncertainty.{csv,json,txt}.
    SweepUncertainty(Common),
    /// MFQM deviation from the classical path as hbar shrinks.
    SweepHbar(Common),
    /// Time spent in each well for one double-well run.
    Dwell(Common),
    /// Tilted-ellipse fit of matched MFQM and CCM harmonic runs.
    EllipseCheck(Common),
    /// Lowest Schrodinger eigenpairs on a grid; writes spectrum.json.
    Spectrum(WithLevels),
    /// CCM dwell ratios next to quantum well probabilities.
    Compare(WithLevels),
    /// Transport a Gaussian Wigner ensemble along classical paths.
    Ensemble(Common),
    /// Bracket, structure-matrix and complexification residuals.
    IdentityCheck(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::SweepUncertainty(_) => "sweep-uncertainty",
            Command::SweepHbar(_) => "sweep-hbar",
            Command::Dwell(_) => "dwell",
            Command::EllipseCheck(_) => "ellipse-check",
            Command::Spectrum(_) => "spectrum",
            Command::Compare(_) => "compare",
            Command::Ensemble(_) => "ensemble",
            Command::IdentityCheck(_) => "identity-check",
        }
    }

    fn common(&self) -> (&Common, Option<usize>) {
        match self {
            Command::Spectrum(a) | Command::Compare(a) => (&a.common, a.levels),
            Command::Simulate(c)
            | Command::SweepUncertainty(c)
            | Command::SweepHbar(c)
            | Command::Dwell(c)
            | Command::EllipseCheck(c)
            | Command::Ensemble(c)
            | Command::IdentityCheck(c) => (c, None),
        }
    }
}

fn run(command: &Command) -> Result<(String, PathBuf)> {
    let (common, levels) = command.common();
    let mut cfg = ExperimentConfig::load(common.config.as_deref(), &common.set)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(n) = levels {
        cfg.spectrum.levels = n;
    }
    if let Some(dir) = &common.out {
        cfg.out_dir = dir.clone();
    }
    cfg.validate()?;
    let outcome = match command {
        Command::Simulate(_) => commands::simulate(&cfg),
        Command::SweepUncertainty(_) => commands::sweep_uncertainty(&cfg),
        Command::SweepHbar(_) => commands::sweep_hbar(&cfg),
        Command::Dwell(_) => commands::dwell(&cfg),
        Command::EllipseCheck(_) => commands::ellipse_check(&cfg),
        Command::Spectrum(_) => commands::spectrum(&cfg),
        Command::Compare(_) => commands::compare(&cfg),
        Command::Ensemble(_) => commands::ensemble(&cfg),
        Command::IdentityCheck(_) => commands::identity_check(&cfg),
    }?;
    outcome.write_all(&cfg.out_dir)?;
    let mut resolved = serde_json::to_vec_pretty(&cfg)?;
    resolved.push(b'\n');
    std::fs::write(cfg.out_dir.join("config.json"), resolved)?;
    Ok((outcome.summary, cfg.out_dir))
}

/// Timestamps live only here, never in data files.
fn log_line(dir: &Path, line: &str) {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    if let Ok(mut f) = OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join("xphase.log"))
    {
        let _ = writeln!(f, "{secs} {line}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.command.common().0.quiet;
    match run(&cli.command) {
        Ok((summary, dir)) => {
            log_line(&dir, &summary);
            if !quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("xphase {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
