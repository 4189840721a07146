//! Checks of the energy inequalities and limits along a recorded trajectory.
//!
//! Every check compares a left-hand side against a right-hand side at each
//! sample and reports the worst normalized margin `(RHS − LHS) / scale`
//! together with the tolerance that discretisation error is allowed to eat.
//! `passed` holds exactly when `worst_margin >= −tolerance_used`.

pub mod checks;
pub mod final_state;

use std::fmt::Write as _;

use crate::calibrate::Constants;
use crate::estimates::BootstrapParams;
use crate::scalar::Real;
use crate::solver::Trajectory;
use crate::source::ModelParams;

pub use checks::{
    check_asymptotics, check_bootstrap, check_damped_combination, check_energy_differential,
    check_energy_integral, check_energy_integral_rate_omega, check_improved_estimates, check_initial_interval,
    check_l2_control, check_mean_mode, check_mean_mode_bound, check_source_bound, check_standard_energy_bound,
    mean_mode_discrepancy,
};
pub use final_state::{check_algebra, check_fractional, check_sobolev, check_wirtinger};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check_id: String,
    pub passed: bool,
    /// Minimum over samples of the normalized `RHS − LHS`; NaN when skipped.
    pub worst_margin: f64,
    pub worst_time: f64,
    pub tolerance_used: f64,
    pub skip_reason: Option<String>,
}

impl CheckResult {
    pub fn skipped(check_id: &str, reason: String) -> Self {
        Self {
            check_id: check_id.to_string(),
            passed: false,
            worst_margin: f64::NAN,
            worst_time: f64::NAN,
            tolerance_used: f64::NAN,
            skip_reason: Some(reason),
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.skip_reason.is_some()
    }

    pub fn status(&self) -> &'static str {
        match (self.is_skipped(), self.passed) {
            (true, _) => "SKIP",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        }
    }
}

/// `diff / scale`, with a zero scale meaning the right-hand side vanishes
/// and only the sign of `diff` matters.
pub(crate) fn normalized(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else if diff >= 0.0 {
        0.0
    } else {
        -1.0
    }
}

/// Keeps the sample with the least slack `margin + tolerance`.
pub(crate) struct Tracker {
    id: String,
    worst: Option<(f64, f64, f64)>,
    failed: bool,
}

impl Tracker {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            worst: None,
            failed: false,
        }
    }

    pub fn observe(&mut self, t: f64, margin: f64, tol: f64) {
        // NaN margins fail the check outright
        let slack = if margin.is_nan() { f64::NEG_INFINITY } else { margin + tol };
        self.failed |= !(margin >= -tol);
        if self.worst.is_none_or(|(m, _, w)| slack < m + w) {
            self.worst = Some((margin, t, tol));
        }
    }

    pub fn finish(self) -> CheckResult {
        match self.worst {
            None => CheckResult::skipped(&self.id, "no samples in the checked range".into()),
            Some((margin, t, tol)) => CheckResult {
                check_id: self.id,
                passed: !self.failed,
                worst_margin: margin,
                worst_time: t,
                tolerance_used: tol,
                skip_reason: None,
            },
        }
    }
}

/// Knobs for [`run_all`].
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub scenario: String,
    /// Absolute tolerance for the long-time limits.
    pub asymptotic_tol: f64,
    /// Relative tolerance of the mean-mode quadrature comparison.
    pub mean_mode_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            scenario: "unnamed".into(),
            asymptotic_tol: 1e-6,
            mean_mode_tol: 1e-3,
        }
    }
}

/// All check results for one trajectory.
#[derive(Debug, Clone)]
pub struct VerificationReport<T> {
    pub scenario: String,
    pub params: ModelParams<T>,
    pub bootstrap: Option<BootstrapParams<T>>,
    /// Gating checks, one per registered check.
    pub results: Vec<CheckResult>,
    /// Reported but never gating.
    pub diagnostics: Vec<CheckResult>,
    /// `ū(t_end)`, the estimate of the limiting constant.
    pub c0_estimate: Option<f64>,
    /// First sample where `½‖u‖²_{H^m} > E_m²(0)`, else the breakdown time.
    pub t_max_empirical: Option<f64>,
    /// Largest sample time up to which `‖u‖_{H^m} <= ½E_m(0)` held.
    pub t1_empirical: Option<f64>,
    /// `sup ‖F‖_{H^m} / (e^{−κt}‖a‖_{H^m})` over the samples.
    pub c_delta_measured: Option<f64>,
    /// `sup_t ‖a(t)‖_{H^m}` over the samples.
    pub source_amplitude: f64,
    /// `max − min` of `‖∇u‖_{H^m}` over the final tenth of the samples.
    pub grad_oscillation: Option<f64>,
    pub breakdown: Option<String>,
}

impl<T: Real> VerificationReport<T> {
    /// No gating check failed. Skipped checks do not count as failures.
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed || r.is_skipped())
    }

    pub fn result(&self, id: &str) -> Option<&CheckResult> {
        self.results.iter().chain(&self.diagnostics).find(|r| r.check_id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed && !r.is_skipped())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(
            s,
            "params: omega = {} kappa = {} mu = {} K = {} m = {}",
            p.omega,
            p.kappa,
            p.mu,
            p.k_eos.map_or("none".to_string(), |k| k.to_string()),
            p.m
        );
        match &self.bootstrap {
            Some(b) => {
                let _ = writeln!(
                    s,
                    "bootstrap: E_m(0) = {:e} delta = {:e} delta' = {:e} T1 = {} eps' = {:e} eps1 = {:e} eps2 = {:e} C(delta) = {:e}",
                    b.e_m0.to_f64_lossy(),
                    b.delta.to_f64_lossy(),
                    b.delta_prime.to_f64_lossy(),
                    b.t1,
                    b.eps_prime.to_f64_lossy(),
                    b.eps1.to_f64_lossy(),
                    b.eps2.to_f64_lossy(),
                    b.c_delta.to_f64_lossy()
                );
            }
            None => {
                let _ = writeln!(s, "bootstrap: none");
            }
        }
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:e}"));
        let _ = writeln!(s, "source_amplitude = {:e}", self.source_amplitude);
        let _ = writeln!(s, "c0_estimate = {}", opt(self.c0_estimate));
        let _ = writeln!(s, "t_max_empirical = {}", opt(self.t_max_empirical));
        let _ = writeln!(s, "t1_empirical = {}", opt(self.t1_empirical));
        let _ = writeln!(s, "c_delta_measured = {}", opt(self.c_delta_measured));
        let _ = writeln!(s, "grad_oscillation_final_window = {}", opt(self.grad_oscillation));
        let _ = writeln!(s, "breakdown = {}", self.breakdown.as_deref().unwrap_or("none"));
        let _ = writeln!(s);
        for (section, list) in [("checks", &self.results), ("diagnostics", &self.diagnostics)] {
            let _ = writeln!(s, "[{section}]");
            for r in list {
                let _ = write!(
                    s,
                    "{} {} worst_margin = {:e} worst_time = {} tolerance = {:e}",
                    r.check_id,
                    r.status(),
                    r.worst_margin,
                    r.worst_time,
                    r.tolerance_used
                );
                if let Some(reason) = &r.skip_reason {
                    let _ = write!(s, " reason = {reason}");
                }
                let _ = writeln!(s);
            }
        }
        let count = |status| self.results.iter().filter(|r| r.status() == status).count();
        let _ = writeln!(
            s,
            "\nsummary: {} passed, {} failed, {} skipped",
            count("PASS"),
            count("FAIL"),
            count("SKIP")
        );
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check_id,status,gating,worst_margin,worst_time,tolerance_used,skip_reason\n");
        for (gating, list) in [(true, &self.results), (false, &self.diagnostics)] {
            for r in list {
                let num = |v: f64| if v.is_nan() { String::new() } else { format!("{v:e}") };
                let reason = r.skip_reason.as_deref().unwrap_or("").replace('"', "'");
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},\"{}\"",
                    r.check_id,
                    r.status(),
                    gating,
                    num(r.worst_margin),
                    num(r.worst_time),
                    num(r.tolerance_used),
                    reason
                );
            }
        }
        s
    }
}

/// Run every registered check. Trajectory checks run concurrently; the
/// result order is fixed.
pub fn run_all<T: Real>(
    traj: &Trajectory<T>,
    bp: Option<&BootstrapParams<T>>,
    constants: &Constants,
    options: &VerifyOptions,
) -> VerificationReport<T> {
    let c = checks::Columns::new(&traj.samples);
    let (along, (bootstrap, t_max), (step1, t1), (asym, c0), (source, c_measured), diag) = std::thread::scope(|s| {
        let along = s.spawn(|| {
            vec![
                check_energy_differential(traj),
                check_energy_integral(traj),
                check_l2_control(traj),
                check_damped_combination(traj),
                check_improved_estimates(traj, bp),
                check_mean_mode(traj, options.mean_mode_tol),
                check_mean_mode_bound(traj, bp),
                check_standard_energy_bound(traj),
            ]
        });
        let bootstrap = s.spawn(|| check_bootstrap(traj));
        let step1 = s.spawn(|| check_initial_interval(traj));
        let asym = s.spawn(|| check_asymptotics(traj, options.asymptotic_tol));
        let source = s.spawn(|| check_source_bound(traj, bp));
        let diag = s.spawn(|| check_energy_integral_rate_omega(traj));
        (
            along.join().expect("check thread panicked"),
            bootstrap.join().expect("check thread panicked"),
            step1.join().expect("check thread panicked"),
            asym.join().expect("check thread panicked"),
            source.join().expect("check thread panicked"),
            diag.join().expect("check thread panicked"),
        )
    });

    let m = traj.params.m;
    let state = &traj.final_state;
    let final_checks = [
        ("torus.wirtinger", check_wirtinger(state)),
        ("torus.algebra", check_algebra(state, m, constants)),
        ("torus.sobolev_embedding", check_sobolev(state, m, constants)),
        ("estimates.fractional_power", check_fractional(state, &traj.params, bp, constants)),
    ]
    .into_iter()
    .map(|(id, r)| r.unwrap_or_else(|e| CheckResult::skipped(id, e.to_string())));

    let mut results = vec![bootstrap, step1];
    results.extend(along);
    results.extend(asym);
    results.push(source);
    results.extend(final_checks);

    let n = c.len();
    let grad_oscillation = (n > 0).then(|| {
        let window = &c.grad_u[(9 * n) / 10..];
        let hi = window.iter().copied().fold(f64::MIN, f64::max);
        let lo = window.iter().copied().fold(f64::MAX, f64::min);
        hi - lo
    });

    VerificationReport {
        scenario: options.scenario.clone(),
        params: traj.params,
        bootstrap: bp.cloned(),
        results,
        diagnostics: vec![diag],
        c0_estimate: c0,
        t_max_empirical: t_max.or(traj.breakdown.as_ref().map(|b| b.t)),
        t1_empirical: t1,
        c_delta_measured: c_measured,
        source_amplitude: c.source_amplitude(),
        grad_oscillation,
        breakdown: traj.breakdown.as_ref().map(|b| format!("t = {}: {}", b.t, b.reason)),
    }
}

/// A copy of `traj` with `E_m²` multiplied by `e^{Ωt}`, a trajectory that
/// violates the energy inequalities by construction.
pub fn corrupt_energy<T: Real>(traj: &Trajectory<T>) -> Trajectory<T> {
    let mut out = traj.clone();
    let om = traj.params.omega;
    for s in &mut out.samples {
        s.e_m_sq *= (om * s.t).exp();
    }
    out
}
