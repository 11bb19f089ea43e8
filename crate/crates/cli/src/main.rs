//! `mslab`: batch verifications for discrete multisymplectic field theory.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use commands::{Failure, Outcome};
use config::ExperimentConfig;

const EXIT_TOLERANCE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    MsffCheck,
    BridgesCheck,
    BoundaryLagrangian,
    Mechanics,
}

#[derive(Parser, Debug)]
#[command(name = "mslab", version, about = "Discrete multisymplectic form formula and generating-function checks")]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the tolerance in the config.
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for the JSON report and CSV field dumps.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("MSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("MSLAB_THREADS must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err("MSLAB_THREADS must be positive".into());
    }
    let available = std::thread::available_parallelism().map_or(1, |p| p.get());
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.min(available))
        .build_global()
        .map_err(|e| format!("thread pool: {e}"))
}

fn write_outputs(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome, text: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(cfg.report_name()), format!("{text}\n"))?;
    if cfg.output.fields {
        for (name, field) in &outcome.fields {
            std::fs::write(dir.join(format!("{name}.csv")), field.to_csv())?;
        }
    }
    Ok(())
}

fn command_name(c: Command) -> String {
    c.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn run(args: &Args) -> Result<Outcome, Failure> {
    configure_threads()?;
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(name) = &cfg.command {
        if *name != command_name(args.command) {
            return Err(Failure::Config(format!("config is for `{name}`, not `{}`", command_name(args.command))));
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.tol = Some(tol);
    }
    let outcome = match args.command {
        Command::MsffCheck => commands::msff_check(&cfg)?,
        Command::BridgesCheck => commands::bridges_check(&cfg)?,
        Command::BoundaryLagrangian => commands::boundary_lagrangian_cmd(&cfg)?,
        Command::Mechanics => commands::mechanics_cmd(&cfg)?,
    };
    let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    println!("{text}");
    if let Some(dir) = &args.out {
        write_outputs(dir, &cfg, &outcome, &text)
            .map_err(|e| Failure::Config(format!("cannot write to {}: {e}", dir.display())))?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(outcome) if outcome.pass => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("tolerance check failed");
            ExitCode::from(EXIT_TOLERANCE)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
