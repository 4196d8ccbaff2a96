use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use swapsteer_core::config::{parse_config, OutputFormat};
use swapsteer_core::error::{Error, Result};
use swapsteer_core::report::render_report;
use swapsteer_core::run::{run, Command};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Witness,
    Selftest,
    Certify,
    LhsBound,
    Sweep,
    AttackDemo,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Witness => Command::Witness,
            Cmd::Selftest => Command::Selftest,
            Cmd::Certify => Command::Certify,
            Cmd::LhsBound => Command::LhsBound,
            Cmd::Sweep => Command::Sweep,
            Cmd::AttackDemo => Command::AttackDemo,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Human,
    Machine,
}

/// Swap-steering witness, self-testing and randomness certification.
#[derive(Debug, Parser)]
#[command(name = "swapsteer", version)]
struct Cli {
    command: Cmd,
    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn init_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("SWAPSTEER_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidConfig(format!("SWAPSTEER_THREADS must be a positive integer, got `{raw}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    init_threads()?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.output_path = Some(out);
    }
    if let Some(f) = cli.format {
        config.output_format = match f {
            Format::Human => OutputFormat::Human,
            Format::Machine => OutputFormat::Machine,
        };
    }
    let report = run(cli.command.into(), &config)?;
    let text = render_report(&report, config.output_format)?;
    match &config.output_path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swapsteer: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
