//! `harvest`: simulate and analyse logistic growth under delayed impulsive harvesting.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use harvest_core::InitialData;

use crate::commands::Command;
use crate::config::{
    EffortSpec, Format, OutputConfig, ParamsConfig, RunConfig, StoppingConfig, SurvivalConfig, SweepConfig,
};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "harvest", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

/// Flags override the config file field by field.
#[derive(Debug, Args)]
struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent. A `<out>.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Intrinsic growth rate r.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Carrying capacity K_c.
    #[arg(long, global = true)]
    kc: Option<f64>,
    /// Harvest period T.
    #[arg(long, global = true)]
    period: Option<f64>,
    /// Harvest effort E in (0, 1), or `optimal`.
    #[arg(long, global = true)]
    effort: Option<EffortSpec>,
    /// Delay k in periods.
    #[arg(long, global = true)]
    delay: Option<usize>,

    /// Post-harvest value N(0^+).
    #[arg(long, global = true)]
    n0_plus: Option<f64>,
    /// Pre-harvest records N(0), N(-T), ..., N(-(k-1)T), comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    history: Option<Vec<f64>>,

    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    consecutive_hits: Option<usize>,
    #[arg(long, global = true)]
    max_periods: Option<usize>,
    #[arg(long, global = true)]
    extinction_threshold: Option<f64>,

    /// Basin: iterations per sample.
    #[arg(long, global = true)]
    iterations: Option<usize>,
    /// Basin: survival window half-width around x*.
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Basin: extinction threshold.
    #[arg(long, global = true)]
    basin_threshold: Option<f64>,
    /// Basin: upper end of the sampling cube (default 2 K_c).
    #[arg(long, global = true)]
    domain_max: Option<f64>,
    /// Basin: number of samples.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Simulate: trajectory samples per period.
    #[arg(long, global = true)]
    samples_per_period: Option<usize>,
    /// Bounds: largest delay.
    #[arg(long, global = true)]
    k_max: Option<usize>,
    /// Frontier bisection tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Half-width of the Marginal band in stability verdicts.
    #[arg(long, global = true)]
    boundary_tol: Option<f64>,

    /// Sweep / yield CSV: delays, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
    #[arg(long, global = true)]
    rt_start: Option<f64>,
    #[arg(long, global = true)]
    rt_stop: Option<f64>,
    #[arg(long, global = true)]
    rt_step: Option<f64>,
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig> {
        let init = match (self.n0_plus, &self.history) {
            (Some(n0), history) => Some(InitialData::new(n0, history.clone().unwrap_or_default())?),
            (None, Some(_)) => return Err(CliError::Config("--history requires --n0-plus".into())),
            (None, None) => None,
        };
        Ok(RunConfig {
            params: ParamsConfig {
                r: self.r,
                capacity: self.kc,
                period: self.period,
                effort: self.effort,
                k: self.delay,
            },
            init,
            stopping: StoppingConfig {
                rel_tol: self.rel_tol,
                consecutive_hits: self.consecutive_hits,
                max_periods: self.max_periods,
                extinction_threshold: self.extinction_threshold,
            },
            survival: SurvivalConfig {
                iterations: self.iterations,
                window_halfwidth: self.window,
                extinction_threshold: self.basin_threshold,
                domain_max: self.domain_max,
            },
            sweep: SweepConfig {
                k_list: self.k_list.clone(),
                rt_start: self.rt_start,
                rt_stop: self.rt_stop,
                rt_step: self.rt_step,
                effort: None,
            },
            output: OutputConfig {
                path: self.out.clone(),
                format: self.format,
            },
            seed: self.seed,
            samples: self.samples,
            samples_per_period: self.samples_per_period,
            k_max: self.k_max,
            tolerance: self.tolerance,
            boundary_tol: self.boundary_tol,
        })
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let file = match &cli.flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = file.overlay(&cli.flags.to_config()?);
    commands::execute(cli.command, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(error::EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("harvest: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
