use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fkv_core::config::{parse_config_with_overrides, ExperimentConfig};
use fkv_core::experiment::{run_experiment, Stage};
use fkv_core::Error;

/// Thread count for the parallel sweep; unset leaves rayon's default.
const THREADS_ENV: &str = "FKV_THREADS";

#[derive(Parser)]
#[command(name = "fkv", version, about = "Fractional Kelvin-Voigt damping lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the configuration and print it with defaults filled in
    Validate(Common),
    /// Export matrices and the xi grid, then check the spectrum densely
    Spectrum(Common),
    /// Simulate the energy decay and fit its tail exponent
    Evolve(Common),
    /// Sweep the resolvent norm along the imaginary axis and fit its growth
    Sweep(Common),
    /// Run every stage and write the summary and plot data
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration document
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run only this stage: spectrum, evolve, sweep or plots
    #[arg(long, value_name = "NAME")]
    stage: Option<String>,
    /// key=value, applied after the document; repeatable
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Exit with status 4 when a fitted exponent misses its target
    #[arg(long)]
    check: bool,
}

enum Failure {
    Config(String),
    Numerical(String),
    Mismatch,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Mismatch => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::Config { .. } => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut config = parse_config_with_overrides(&text, &common.overrides)?;
    if let Some(out) = &common.out {
        config.output.dir = out.clone();
    }
    Ok(config)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{THREADS_ENV}='{raw}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numerical(format!("cannot start {n} threads: {e}")))
}

fn stages_for(command_stage: Option<Stage>, requested: Option<&str>) -> Result<Vec<Stage>, Failure> {
    let requested = requested.map(str::parse::<Stage>).transpose()?;
    match (command_stage, requested) {
        (None, None) => Ok(Stage::ALL.to_vec()),
        (None, Some(s)) => Ok(vec![s]),
        (Some(c), None) => Ok(vec![c]),
        (Some(c), Some(s)) if c == s => Ok(vec![c]),
        (Some(c), Some(s)) => Err(Failure::Config(format!(
            "--stage {s} does not belong to the '{c}' subcommand; use 'report --stage {s}'"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let (common, stage) = match &cli.command {
        Command::Validate(c) => (c, None),
        Command::Spectrum(c) => (c, Some(Stage::Spectrum)),
        Command::Evolve(c) => (c, Some(Stage::Evolve)),
        Command::Sweep(c) => (c, Some(Stage::Sweep)),
        Command::Report(c) => (c, None),
    };
    let config = load(common)?;
    if let Command::Validate(_) = cli.command {
        print!("{}", config.to_document());
        return Ok(());
    }
    let stages = stages_for(stage, common.stage.as_deref())?;
    let summary = run_experiment(&config, &stages)?;
    print!("{}", summary.text(&config));
    for f in &summary.files {
        println!("wrote: {}", f.display());
    }
    if common.check && !summary.passes() {
        return Err(Failure::Mismatch);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) | Failure::Numerical(m) => eprintln!("error: {m}"),
                Failure::Mismatch => eprintln!("error: a fitted exponent does not match its target"),
            }
            ExitCode::from(f.code())
        }
    }
}
