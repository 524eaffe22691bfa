//! `mpqc` command-line harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpqc::harness::{self, ExperimentConfig, OutputFormat, RunMode, SweepSection};
use mpqc::Error;

#[derive(Parser)]
#[command(name = "mpqc", version, about = "Simulate and analyze equitable multiparty quantum communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-input characterization over every Z and X pattern.
    Characterize(RunArgs),
    /// Random-basis key generation rounds.
    Keygen(RunArgs),
    /// Faked-measurement attack (localized) or channel-loss tamper (equitable).
    Attack(RunArgs),
    /// Characterization at each point of a parameter grid.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// mu, phi, eta_channel, eta_channel[j], extra_loss or phase_window.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated grid values; may be empty.
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid: Option<Grid>,
    },
    /// Parse and validate a config; print the effective config and its hash.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rounds: Option<u64>,
    /// Worker threads; 1 runs serially.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted. A `<out>.config.toml` with the
    /// effective config is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone)]
struct Grid(Vec<f64>);

fn parse_grid(text: &str) -> Result<Grid, String> {
    text.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()
        .map(Grid)
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load(run: &RunArgs, mode: RunMode) -> Result<ExperimentConfig, Failure> {
    let mut config = harness::parse_config(&run.config).map_err(|e| Failure::Config(e.to_string()))?;
    config.mode = mode;
    if let Some(seed) = run.seed {
        config.seed = seed;
    }
    if let Some(rounds) = run.rounds {
        config.rounds = rounds;
    }
    Ok(config)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.toml");
    PathBuf::from(name)
}

fn execute(config: ExperimentConfig, run: &RunArgs) -> Result<(), Failure> {
    config.validate()?;
    if run.workers == 0 {
        return Err(Failure::Config("`--workers` must be at least 1".into()));
    }
    let table = harness::run(&config, run.workers)?;
    let format = match run.format {
        Format::Csv => OutputFormat::Csv,
        Format::Jsonl => OutputFormat::Jsonl,
    };
    match &run.out {
        Some(path) => {
            harness::emit(&table, format, path)?;
            let side = sidecar(path);
            std::fs::write(&side, config.to_toml()?)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", side.display())))?;
        }
        None => print!("{}", table.render(format)),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Characterize(run) => execute(load(&run, RunMode::Characterize)?, &run),
        Command::Keygen(run) => execute(load(&run, RunMode::Keygen)?, &run),
        Command::Attack(run) => execute(load(&run, RunMode::Attack)?, &run),
        Command::Sweep { run, param, grid } => {
            let mut config = load(&run, RunMode::Sweep)?;
            let mut sweep = config.sweep.take().unwrap_or(SweepSection {
                param: String::new(),
                grid: Vec::new(),
            });
            if let Some(p) = param {
                sweep.param = p;
            }
            if let Some(Grid(g)) = grid {
                sweep.grid = g;
            }
            if sweep.param.is_empty() {
                return Err(Failure::Config("sweep needs `--param` or a [sweep] table".into()));
            }
            config.sweep = Some(sweep);
            execute(config, &run)
        }
        Command::ValidateConfig { config } => {
            let config = harness::parse_config(&config).map_err(|e| Failure::Config(e.to_string()))?;
            print!("# config_hash = \"{}\"\n{}", config.config_hash(), config.to_toml()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
