//! `cutstack`: build cutting-and-stacking towers from schedules, measure
//! covering numbers and entropy of their names, and run the exhaustive
//! bound checks.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use commands::Ctx;
use config::{ConfigError, Loaded};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "CUTSTACK_OUT_DIR";

#[derive(Parser)]
#[command(name = "cutstack", version, about = "Cutting-and-stacking towers and slow-entropy measurements")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log verbosity (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a schedule and write the tower snapshot and stage log.
    Build(Common),
    /// Covering numbers over the n, epsilon and delta grids.
    Cover(Common),
    /// Covering numbers divided by the rate a_n(t), with trends.
    Slowent(Common),
    /// Entropy of n-names and the mass-split inequalities.
    Blume(Common),
    /// Exhaustive block-code bound checks over the configured grid.
    Verify(Common),
    /// Generate a named construction's schedule, parameters and tower.
    Scenario(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (TOML).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Schedule file (TOML); overrides the config's schedule and scenario.
    #[arg(short, long)]
    schedule: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// Seed for randomized checks; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG charts.
    #[arg(long)]
    svg: bool,
    /// Record wall-clock runtimes (otherwise written as NA so outputs are reproducible).
    #[arg(long)]
    timing: bool,
}

/// Exit status by error class: configuration 2, infeasible 3, resource 4.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<cutstack::Error>() {
            return match e {
                cutstack::Error::Infeasible(_) | cutstack::Error::ParameterSearch(_) => 3,
                cutstack::Error::Resource(_) => 4,
                _ => 2,
            };
        }
    }
    1
}

fn context(common: &Common) -> anyhow::Result<Ctx> {
    let loaded = Loaded::from_path(common.config.as_deref())?;
    let out = match (&common.out, &loaded.config.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => loaded.base.join(o),
        (None, None) => PathBuf::from("cutstack-out"),
    };
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let seed = common.seed.unwrap_or(loaded.config.seed);
    Ok(Ctx { loaded, schedule: common.schedule.clone(), out, seed, svg: common.svg, timing: common.timing })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring threads")?;
    }
    let (common, cmd): (&Common, fn(&mut Ctx) -> anyhow::Result<()>) = match &cli.command {
        Command::Build(c) => (c, commands::build),
        Command::Cover(c) => (c, commands::cover),
        Command::Slowent(c) => (c, commands::slowent),
        Command::Blume(c) => (c, commands::blume),
        Command::Verify(c) => (c, commands::verify),
        Command::Scenario(c) => (c, commands::scenario),
    };
    let mut ctx = context(common)?;
    cmd(&mut ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
