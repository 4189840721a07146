//! Files written for one run.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use dampwave::calibrate::Constants;
use dampwave::scenario::Outcome;

/// Bumped whenever the time-series columns change.
pub const TIMESERIES_SCHEMA: u32 = 1;

pub const TIMESERIES_COLUMNS: [&str; 11] = [
    "t", "Em", "Em_sq", "E_std_sq", "u_Hm", "ut_Hm", "F_Hm", "u_mean", "F_mean", "u_min", "bootstrap_ok",
];

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn timeseries_csv(outcome: &Outcome<f64>) -> String {
    let mut s = format!("# schema_version = {TIMESERIES_SCHEMA}\n{}\n", TIMESERIES_COLUMNS.join(","));
    let e0_sq = outcome.trajectory.samples.first().map_or(0.0, |x| x.e_m_sq);
    for x in &outcome.trajectory.samples {
        let ok = 0.5 * x.u_hm * x.u_hm <= e0_sq;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(x.t),
            num(x.e_m()),
            num(x.e_m_sq),
            num(x.e_std_sq),
            num(x.u_hm),
            num(x.ut_hm),
            num(x.f_hm),
            num(x.u_mean),
            num(x.f_mean),
            num(x.u_min),
            u8::from(ok)
        );
    }
    s
}

pub fn write_run(dir: &Path, outcome: &Outcome<f64>, echo: &str, constants: &Constants) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let files = [
        ("timeseries.csv", timeseries_csv(outcome)),
        ("report.txt", outcome.report.to_text()),
        ("report.csv", outcome.report.to_csv()),
        ("resolved.toml", echo.to_string()),
        ("constants.txt", constants.to_file_string()),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// 0 when every non-skipped check passed, 1 when one failed, 2 on breakdown.
pub fn exit_code(outcome: &Outcome<f64>) -> i32 {
    if outcome.trajectory.breakdown.is_some() {
        2
    } else if outcome.report.all_passed() {
        0
    } else {
        1
    }
}
