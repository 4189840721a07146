//! Parameter sweeps over one or two axes.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::Result;
use rayon::prelude::*;

use crate::config::{ConfigError, Exponents, ScenarioConfig};
use crate::run::run_config;
use dampwave::scenario::Amplitude;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    Omega,
    KEos,
    /// Absolute source amplitude.
    Eps,
    /// Source amplitude as a fraction of the budget.
    EpsBudget,
    /// Target `E_m(0)`.
    Energy,
}

impl AxisName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::Omega => "omega",
            AxisName::KEos => "k_eos",
            AxisName::Eps => "eps",
            AxisName::EpsBudget => "eps_budget",
            AxisName::Energy => "energy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl FromStr for Axis {
    type Err = ConfigError;

    /// `name=v1,v2,...`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, values) = s
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("axis `{s}` is not of the form name=v1,v2,...")))?;
        let name = match name.trim() {
            "omega" => AxisName::Omega,
            "k_eos" => AxisName::KEos,
            "eps" => AxisName::Eps,
            "eps_budget" => AxisName::EpsBudget,
            "energy" => AxisName::Energy,
            other => {
                return Err(ConfigError(format!(
                    "unknown axis `{other}`; expected omega, k_eos, eps, eps_budget or energy"
                )))
            }
        };
        let values = values
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError(format!("axis `{s}`: {e}")))?;
        if values.is_empty() {
            return Err(ConfigError(format!("axis `{s}` has no values")));
        }
        Ok(Self { name, values })
    }
}

fn apply(cfg: &mut ScenarioConfig, axis: AxisName, v: f64) -> Result<(), ConfigError> {
    match axis {
        AxisName::Omega => cfg.model.omega = v,
        AxisName::KEos => match &mut cfg.model.exponents {
            Exponents::Eos { k } => *k = v,
            Exponents::Explicit { .. } => {
                return Err(ConfigError("the k_eos axis needs `model.k_eos` in the scenario".into()))
            }
        },
        AxisName::Eps => cfg.amplitude = Amplitude::Absolute(v),
        AxisName::EpsBudget => cfg.amplitude = Amplitude::BudgetFraction(v),
        AxisName::Energy => cfg.initial.energy = Some(v),
    }
    Ok(())
}

/// Grid points in row-major order over the axes.
pub fn points(axes: &[Axis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![vec![]], |acc, axis| {
        acc.iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect()
    })
}

struct Row {
    values: Vec<f64>,
    exit_code: i32,
    t_max: Option<f64>,
    all_passed: bool,
    failed: Vec<String>,
    skipped: Vec<String>,
    message: String,
}

/// Run every point in `out/point_NNN` and write `out/summary.csv`.
pub fn sweep(base: &ScenarioConfig, axes: &[Axis], out: &Path, jobs: Option<usize>) -> Result<()> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(ConfigError(format!("a sweep takes one or two axes, got {}", axes.len())).into());
    }
    let pts = points(axes);
    let configs = pts
        .iter()
        .map(|p| {
            let mut c = base.clone();
            for (axis, &v) in axes.iter().zip(p) {
                apply(&mut c, axis.name, v)?;
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let rows: Vec<Row> = pool.install(|| {
        configs
            .par_iter()
            .zip(&pts)
            .enumerate()
            .map(|(i, (cfg, p))| {
                let dir = out.join(format!("point_{i:03}"));
                let mut row = Row {
                    values: p.clone(),
                    exit_code: 0,
                    t_max: None,
                    all_passed: false,
                    failed: vec![],
                    skipped: vec![],
                    message: String::new(),
                };
                match run_config(cfg, &dir) {
                    Ok((code, outcome)) => {
                        let r = &outcome.report;
                        row.exit_code = code;
                        row.t_max = r.t_max_empirical;
                        row.all_passed = r.all_passed();
                        row.failed = r.failures().map(|c| c.check_id.clone()).collect();
                        row.skipped = r
                            .results
                            .iter()
                            .filter(|c| c.is_skipped())
                            .map(|c| c.check_id.clone())
                            .collect();
                    }
                    Err(e) => {
                        row.exit_code = e.exit_code();
                        row.message = e.to_string().replace('"', "'");
                    }
                }
                row
            })
            .collect()
    });

    let mut s = String::from("point");
    for a in axes {
        let _ = write!(s, ",{}", a.name.as_str());
    }
    s.push_str(",exit_code,t_max_empirical,all_passed,failed_checks,skipped_checks,message\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(s, "{i}");
        for v in &r.values {
            let _ = write!(s, ",{v:.16e}");
        }
        let _ = writeln!(
            s,
            ",{},{},{},{},{},\"{}\"",
            r.exit_code,
            r.t_max.map_or(String::new(), |t| format!("{t:.16e}")),
            r.all_passed,
            r.failed.join(";"),
            r.skipped.join(";"),
            r.message
        );
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("summary.csv"), s)?;
    Ok(())
}
