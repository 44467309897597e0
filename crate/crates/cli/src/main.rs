mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pursuit_core::{Algorithm, TieBreak};

use crate::config::{
    parse_enum, EnvironmentSection, Format, OutputSection, PartialConfig, RunSection,
    ScheduleSection,
};

/// Pursuit learning automata: simulation, iteration bounds and numeric checks.
#[derive(Debug, Parser)]
#[command(name = "pursuit", version)]
struct Cli {
    /// Master seed; overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides `output.dir` and $PURSUIT_OUT_DIR.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Output format; overrides `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run replicates and write trace, report and manifest files.
    Simulate(SimulateArgs),
    /// Compute the deterministic iteration bound T* = T3 + T4.
    Bound(BoundArgs),
    /// Run the numeric and Monte Carlo check suites.
    Verify(VerifyArgs),
    /// Run two schedules on shared seeds and compare them.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    reward_probs: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_enum::<Algorithm>)]
    algorithm: Option<Algorithm>,
    #[arg(long, value_parser = parse_enum::<TieBreak>)]
    tie_break: Option<TieBreak>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long)]
    init_pulls: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
    /// Half-gap for h = eta^2 / 8; defaults to half the top-two gap.
    #[arg(long)]
    eta: Option<f64>,
    /// Keep every n-th iteration in the trace (1 keeps all).
    #[arg(long)]
    stride: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Step-size schedule, e.g. `harmonic:0.8` or `constant:0.05`.
    #[arg(long)]
    schedule: Option<String>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// First schedule.
    first: String,
    /// Second schedule.
    second: String,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, conflicts_with = "h")]
    eta: Option<f64>,
    /// Hoeffding exponent given directly instead of through `--eta`.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = 2)]
    actions: usize,
    /// Sweep one of eps, delta, theta, eta: `theta=0.7:0.95:0.05`.
    #[arg(long)]
    scan: Option<String>,
    /// Largest iteration count the solver searches.
    #[arg(long)]
    ceiling: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Series,
    Integral,
    Mgf,
    Hoeffding,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    suite: SuiteArg,
    /// Monte Carlo suites: schedule parameter.
    #[arg(long)]
    theta: Option<f64>,
    /// Monte Carlo suites: times to check.
    #[arg(long = "t", value_delimiter = ',')]
    times: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    reward_probs: Option<Vec<f64>>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    replicates: Option<u64>,
    /// Series suite: last term of the envelope scan.
    #[arg(long)]
    t_max: Option<u64>,
}

impl Cli {
    fn overrides(&self, run: &RunArgs, schedule: Option<String>) -> PartialConfig {
        PartialConfig {
            environment: EnvironmentSection {
                reward_probs: run.reward_probs.clone(),
            },
            schedule: ScheduleSection {
                lambda: schedule,
                algorithm: run.algorithm,
                tie_break: run.tie_break,
            },
            run: RunSection {
                horizon: run.horizon,
                replicates: run.replicates,
                seed: self.seed,
                init_pulls: run.init_pulls,
                epsilons: run.epsilons.clone(),
                checkpoints: run.checkpoints.clone(),
                eta: run.eta,
            },
            output: OutputSection {
                stride: run.stride,
                dir: self.out_dir.clone(),
                format: self.format,
            },
        }
    }

    fn resolve(&self, run: &RunArgs, schedule: Option<String>) -> Result<config::RunConfig, error::CliError> {
        let file = match &run.config {
            Some(path) => PartialConfig::load(path)?,
            None => PartialConfig::default(),
        };
        let env_dir = std::env::var_os(config::OUT_DIR_ENV).map(PathBuf::from);
        file.overlay(self.overrides(run, schedule)).resolve(env_dir)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cli
            .resolve(&args.run, args.schedule.clone())
            .and_then(|c| commands::simulate(&c)),
        Command::Compare(args) => cli
            .resolve(&args.run, None)
            .and_then(|c| commands::compare(&c, &args.first, &args.second)),
        Command::Bound(args) => commands::bound(args, cli.format.unwrap_or_default()),
        Command::Verify(args) => commands::verify(args, cli.seed, cli.format.unwrap_or_default()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
