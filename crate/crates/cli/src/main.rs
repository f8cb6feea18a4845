//! `nbandit`: run bandit experiments, evaluate regret bounds and run the
//! numerical checks from the command line.
//!
//! Exit codes: 0 on success, 1 on invalid input or I/O failure, 2 when a
//! verification check fails.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use normal_bandits::bounds::EpsilonSchedule;

use commands::{Common, Figure, Suite};
use config::Overrides;

#[derive(Debug, Parser)]
#[command(
    name = "nbandit",
    version,
    about = "Normal bandit experiments, bounds and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per policy; overrides the config value.
    #[arg(long)]
    replications: Option<u64>,
    /// Horizon; overrides the config value.
    #[arg(long)]
    horizon: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Use a logarithmic x axis in plots.
    #[arg(long)]
    log_x: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the policies in a config and write regret traces.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        global: GlobalArgs,
    },
    /// Evaluate the closed-form regret bounds for a config's instance.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// theorem3, remark3 or fixed:VALUE.
        #[arg(long, default_value = "theorem3", value_parser = parse_schedule)]
        epsilon_schedule: EpsilonSchedule,
        #[command(flatten)]
        global: GlobalArgs,
    },
    /// Run the numerical checks of the probability bounds.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Monte Carlo samples (sandwich) or paths (conjecture).
        #[arg(long)]
        samples: Option<u64>,
        #[command(flatten)]
        global: GlobalArgs,
    },
    /// Run a canned figure reproduction.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        /// theorem3, remark3 or fixed:VALUE (fig2 bounds only).
        #[arg(long, default_value = "theorem3", value_parser = parse_schedule)]
        epsilon_schedule: EpsilonSchedule,
        #[command(flatten)]
        global: GlobalArgs,
    },
}

fn parse_schedule(s: &str) -> Result<EpsilonSchedule, String> {
    match s {
        "theorem3" => Ok(EpsilonSchedule::Theorem3),
        "remark3" => Ok(EpsilonSchedule::Remark3),
        _ => {
            let v = s
                .strip_prefix("fixed:")
                .ok_or_else(|| format!("expected theorem3, remark3 or fixed:VALUE, got {s:?}"))?;
            let e: f64 = v.parse().map_err(|_| format!("invalid epsilon {v:?}"))?;
            if !(e > 0.0 && e < 1.0) {
                return Err(format!("fixed epsilon must lie in (0, 1), got {e}"));
            }
            Ok(EpsilonSchedule::Fixed(e))
        }
    }
}

impl GlobalArgs {
    fn common(&self) -> Common {
        Common {
            out: self.out.clone(),
            overrides: Overrides {
                seed: self.seed,
                replications: self.replications,
                horizon: self.horizon,
            },
            svg: self.svg,
            log_x: self.log_x,
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let global = match &cli.command {
        Command::Simulate { global, .. }
        | Command::Bounds { global, .. }
        | Command::Verify { global, .. }
        | Command::Reproduce { global, .. } => global,
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(global.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => bail!("cannot start {} worker threads: {e}", global.threads),
    };
    let c = global.common();
    pool.install(|| match &cli.command {
        Command::Simulate { config, .. } => commands::simulate(config, &c).map(|_| true),
        Command::Bounds {
            config,
            epsilon_schedule,
            ..
        } => commands::bounds(config, *epsilon_schedule, &c).map(|_| true),
        Command::Verify { suite, samples, .. } => commands::verify(
            *suite,
            *samples,
            c.overrides.seed.unwrap_or(commands::DEFAULT_SEED),
            &c,
        ),
        Command::Reproduce {
            figure,
            epsilon_schedule,
            ..
        } => commands::reproduce(*figure, *epsilon_schedule, &c).map(|_| true),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
