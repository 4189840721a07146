use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dampwave::calibrate::{Constants, CONSTANTS_ENV, DEFAULT_SAMPLES, DEFAULT_SEED};
use dampwave::torus::GridSpec;

mod config;
mod output;
mod run;
mod sweep;

use config::ScenarioConfig;
use run::{run_config, RunError};
use sweep::Axis;

/// Simulate the damped semilinear wave equation on the 3-torus and check
/// its energy estimates along the computed solution.
///
/// Exit codes: 0 all checks passed, 1 a check failed, 2 breakdown,
/// 3 configuration error. The constants file is read from the path in
/// DAMPWAVE_CONSTANTS when set, and calibrated otherwise.
#[derive(Parser)]
#[command(name = "dampwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for every random initial field.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a scenario over a grid of parameter values.
    Sweep {
        config: PathBuf,
        /// `name=v1,v2,...` with name one of omega, k_eos, eps, eps_budget, energy.
        #[arg(long, required = true)]
        axis: Vec<String>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Measure the embedding constants and write a constants file.
    Calibrate {
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value = "constants.txt")]
        out: PathBuf,
    },
}

fn load(path: &PathBuf, o: &Overrides) -> Result<ScenarioConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config::ConfigError(format!("reading {}: {e}", path.display())))?;
    let mut cfg = ScenarioConfig::parse(&text)?;
    if let Some(s) = o.seed {
        cfg.set_seed(s);
    }
    if let Some(dt) = o.dt {
        cfg.dt = dt;
    }
    if let Some(g) = o.grid {
        cfg.grid = g;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let (code, outcome) = run_config(&cfg, &overrides.out)?;
            print!("{}", outcome.report.to_text());
            Ok(code)
        }
        Command::Sweep {
            config,
            axis,
            jobs,
            overrides,
        } => {
            let cfg = load(&config, &overrides)?;
            let axes = axis
                .iter()
                .map(|a| a.parse::<Axis>())
                .collect::<Result<Vec<_>, _>>()?;
            sweep::sweep(&cfg, &axes, &overrides.out, jobs).map_err(|e| match e.downcast::<config::ConfigError>() {
                Ok(c) => RunError::Config(c),
                Err(e) => RunError::Other(e),
            })?;
            println!("summary written to {}", overrides.out.join("summary.csv").display());
            Ok(0)
        }
        Command::Calibrate {
            grid,
            m,
            seed,
            samples,
            out,
        } => {
            let c = Constants::calibrate(GridSpec::new(grid)?, m, seed, samples)?;
            c.write(&out)?;
            println!("constants written to {} (use with {CONSTANTS_ENV})", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
