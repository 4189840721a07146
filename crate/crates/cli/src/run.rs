//! One scenario run, from parsed config to files on disk.

use std::fmt;
use std::path::Path;

use dampwave::calibrate::{Constants, Origin};
use dampwave::scenario::Outcome;
use dampwave::Error;

use crate::config::{physical_message, ConfigError, ScenarioConfig};
use crate::output::{exit_code, write_run};

#[derive(Debug)]
pub enum RunError {
    /// Bad input: exit 3.
    Config(ConfigError),
    /// The integration could not continue: exit 2.
    Breakdown(String),
    Other(anyhow::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 3,
            RunError::Breakdown(_) => 2,
            RunError::Other(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Breakdown(m) => write!(f, "breakdown: {m}"),
            RunError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Breakdown { .. } | Error::NanDetected { .. } => RunError::Breakdown(e.to_string()),
            Error::Series(_) => RunError::Other(e.into()),
            other => RunError::Config(ConfigError(physical_message(&other))),
        }
    }
}

/// Constants from the file named by the environment, else calibrated.
pub fn constants_for(cfg: &ScenarioConfig) -> Result<(Constants, Origin), RunError> {
    let grid = dampwave::torus::GridSpec::new(cfg.grid)?;
    Ok(Constants::from_env_or_calibrate(grid, cfg.model.m)?)
}

/// Build, integrate, verify and write the output files into `dir`.
pub fn run_config(cfg: &ScenarioConfig, dir: &Path) -> Result<(i32, Outcome<f64>), RunError> {
    let scenario = cfg.build()?;
    let (constants, _) = constants_for(cfg)?;
    let outcome = scenario.run(&constants)?;
    let echo = cfg.with_resolved(&scenario.echo(&outcome.resolved)).to_toml();
    write_run(dir, &outcome, &echo, &constants).map_err(RunError::Other)?;
    Ok((exit_code(&outcome), outcome))
}
