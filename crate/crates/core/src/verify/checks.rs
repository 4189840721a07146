//! Checks that run along a recorded trajectory.

use super::{normalized, CheckResult, Tracker};
use crate::energy::EnergySample;
use crate::estimates::{gronwall_bound, BootstrapParams, TimeSeries};
use crate::scalar::Real;
use crate::solver::{mean_mode_reference, Trajectory};

/// Bound on the normalized error of one finite-difference derivative.
pub const C_FD: f64 = 1.0;
/// Absolute floor added to every quadrature or differencing budget.
pub const ABS_FLOOR: f64 = 1e-9;
/// Tolerance for inequalities that involve no discretisation of time.
pub const ROUNDING_TOL: f64 = 1e-12;
/// Integral checks use every `DECIMATION`th sample as `t₀` and as `t`.
pub const DECIMATION: usize = 10;

/// Columns of a trajectory as `f64`.
pub(crate) struct Columns {
    pub t: Vec<f64>,
    pub e_sq: Vec<f64>,
    pub e_std_sq: Vec<f64>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub f: Vec<f64>,
    pub u_mean: Vec<f64>,
    pub grad_u: Vec<f64>,
    pub u_osc: Vec<f64>,
    pub a: Vec<f64>,
    pub damped: Vec<f64>,
}

impl Columns {
    pub fn new<T: Real>(samples: &[EnergySample<T>]) -> Self {
        let col = |f: fn(&EnergySample<T>) -> T| samples.iter().map(|s| f(s).to_f64_lossy()).collect();
        Self {
            t: col(|s| s.t),
            e_sq: col(|s| s.e_m_sq),
            e_std_sq: col(|s| s.e_std_sq),
            u: col(|s| s.u_hm),
            ut: col(|s| s.ut_hm),
            f: col(|s| s.f_hm),
            u_mean: col(|s| s.u_mean),
            grad_u: col(|s| s.grad_u_hm),
            u_osc: col(|s| s.u_osc_hm),
            a: col(|s| s.a_hm),
            damped: col(|s| s.damped_hm),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn e(&self, i: usize) -> f64 {
        self.e_sq[i].max(0.0).sqrt()
    }

    pub fn e0(&self) -> f64 {
        if self.t.is_empty() {
            0.0
        } else {
            self.e(0)
        }
    }

    /// `sup_t ‖a(t,·)‖_{H^m}` over the samples.
    pub fn source_amplitude(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }
}

fn omega<T: Real>(traj: &Trajectory<T>) -> f64 {
    traj.params.omega.to_f64_lossy()
}

/// `dE_m²/dt <= −Ω E_m² + ((Ω²/√2)‖u‖_{H^m} + √2‖F‖_{H^m}) E_m`, derivative
/// by centered differences.
pub fn check_energy_differential<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    const ID: &str = "energy.differential";
    let c = Columns::new(&traj.samples);
    let n = c.len();
    if n < 3 {
        return CheckResult::skipped(ID, format!("needs at least 3 samples, got {n}"));
    }
    let om = omega(traj);
    let y = &c.e_sq;
    let t = &c.t;
    // second differences, then their slope as the third-derivative scale
    let d2: Vec<f64> = (1..n - 1)
        .map(|i| {
            let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            2.0 * ((y[i + 1] - y[i]) / h2 - (y[i] - y[i - 1]) / h1) / (h1 + h2)
        })
        .collect();
    let d3 = |k: usize| -> f64 {
        // k indexes d2, centred at sample k + 1
        if d2.len() < 2 {
            return 0.0;
        }
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(d2.len() - 1);
        ((d2[hi] - d2[lo]) / (t[hi + 1] - t[lo + 1])).abs()
    };
    let floor = c.e_sq[0] * om;
    let mut tr = Tracker::new(ID);
    for i in 1..n - 1 {
        let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        let lhs = (h1 * h1 * y[i + 1] - h2 * h2 * y[i - 1] + (h2 * h2 - h1 * h1) * y[i]) / (h1 * h2 * (h1 + h2));
        let rhs = -om * y[i] + (om * om / 2f64.sqrt() * c.u[i] + 2f64.sqrt() * c.f[i]) * c.e(i);
        let h = h1.max(h2);
        let budget = C_FD * h * h * d3(i - 1) + (h2 - h1).abs() * d2[i - 1].abs() / 3.0 + ABS_FLOOR;
        let scale = rhs.abs().max(floor);
        tr.observe(t[i], normalized(rhs - lhs, scale), normalized_budget(budget, scale));
    }
    tr.finish()
}

fn normalized_budget(budget: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        budget / scale
    } else {
        0.0
    }
}

/// Compare `y` against the Gronwall bound for `y' <= A y + f` from every
/// decimated `t₀`; the quadrature error is estimated by rerunning on every
/// other sample.
fn integral_check(id: &str, t: &[f64], y: &[f64], a: f64, f: &[f64], floor: f64) -> CheckResult {
    let n = t.len();
    if n < 3 {
        return CheckResult::skipped(id, format!("needs at least 3 samples, got {n}"));
    }
    let stride = if n > 2 * DECIMATION { DECIMATION } else { 2 };
    let mut tr = Tracker::new(id);
    for i0 in (0..n - 1).step_by(stride) {
        let fine = bound_from(&t[i0..], f.get(i0..).unwrap_or_default(), a, y[i0], 1);
        let coarse = bound_from(&t[i0..], f.get(i0..).unwrap_or_default(), a, y[i0], 2);
        let (Some(fine), Some(coarse)) = (fine, coarse) else {
            return CheckResult::skipped(id, "non-finite samples".to_string());
        };
        for off in (stride..n - i0).step_by(stride) {
            let j = i0 + off;
            let rhs = fine[off];
            let quad = (rhs - coarse[off / 2]).abs();
            let scale = rhs.abs().max(floor);
            tr.observe(t[j], normalized(rhs - y[j], scale), normalized_budget(quad + ABS_FLOOR, scale));
        }
    }
    tr.finish()
}

/// Gronwall bound on every `step`th sample.
fn bound_from(t: &[f64], f: &[f64], a: f64, g0: f64, step: usize) -> Option<Vec<f64>> {
    let ts: Vec<f64> = t.iter().step_by(step).copied().collect();
    let fs: Vec<f64> = f.iter().step_by(step).map(|v| v.max(0.0)).collect();
    let a_series = TimeSeries::new(ts.clone(), vec![a; ts.len()]).ok()?;
    let f_series = TimeSeries::new(ts.clone(), fs).ok()?;
    gronwall_bound(&a_series, &f_series, g0, ts[0]).ok().map(|b| b.values().to_vec())
}

/// `E_m(t) <= e^{−Ω(t−t₀)/2} E_m(t₀) + ½∫ e^{−Ω(t−s)/2}((Ω²/√2)‖u‖ + √2‖F‖) ds`,
/// the Gronwall consequence of the differential inequality for `E_m`.
pub fn check_energy_integral<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let c = Columns::new(&traj.samples);
    let om = omega(traj);
    let e: Vec<f64> = (0..c.len()).map(|i| c.e(i)).collect();
    let f: Vec<f64> = (0..c.len())
        .map(|i| 0.5 * (om * om / 2f64.sqrt() * c.u[i] + 2f64.sqrt() * c.f[i]))
        .collect();
    integral_check("energy.integral", &c.t, &e, -0.5 * om, &f, c.e0())
}

/// The same bound with decay rate `Ω` and the full forcing, a stronger
/// statement that the differential inequality does not imply. Reported as
/// a diagnostic only.
pub fn check_energy_integral_rate_omega<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let c = Columns::new(&traj.samples);
    let om = omega(traj);
    let e: Vec<f64> = (0..c.len()).map(|i| c.e(i)).collect();
    let f: Vec<f64> = (0..c.len())
        .map(|i| om * om / 2f64.sqrt() * c.u[i] + 2f64.sqrt() * c.f[i])
        .collect();
    integral_check("energy.integral_rate_omega", &c.t, &e, -om, &f, c.e0())
}

/// `½‖u(t)‖²_{H^m} <= E_m²(0)` at every sample; also returns the first
/// violation time.
pub fn check_bootstrap<T: Real>(traj: &Trajectory<T>) -> (CheckResult, Option<f64>) {
    const ID: &str = "bootstrap";
    let c = Columns::new(&traj.samples);
    if c.len() == 0 {
        return (CheckResult::skipped(ID, "no samples".into()), None);
    }
    let e0 = c.e0();
    if 0.25 * c.u[0] > e0 * (1.0 + ROUNDING_TOL) {
        return (
            CheckResult::skipped(
                ID,
                format!(
                    "initial data violate 1/4 |u0|_Hm <= E_m(0): |u0|_Hm = {:.6e}, E_m(0) = {e0:.6e}",
                    c.u[0]
                ),
            ),
            None,
        );
    }
    let rhs = e0 * e0;
    let mut tr = Tracker::new(ID);
    let mut first_violation = None;
    for i in 0..c.len() {
        let lhs = 0.5 * c.u[i] * c.u[i];
        let margin = normalized(rhs - lhs, rhs);
        if margin < -ROUNDING_TOL && first_violation.is_none() {
            first_violation = Some(c.t[i]);
        }
        tr.observe(c.t[i], margin, ROUNDING_TOL);
    }
    (tr.finish(), first_violation)
}

/// Existence of an initial interval on which `‖u(t)‖_{H^m} <= ½E_m(0)`.
///
/// This needs `‖u₀‖_{H^m} < ½E_m(0)`, which the standing hypothesis
/// `¼‖u₀‖ <= E_m(0)` does not provide; such data are skipped with a reason.
/// Returns the largest sample time up to which the bound holds.
pub fn check_initial_interval<T: Real>(traj: &Trajectory<T>) -> (CheckResult, Option<f64>) {
    const ID: &str = "bootstrap.step1";
    let c = Columns::new(&traj.samples);
    if c.len() == 0 {
        return (CheckResult::skipped(ID, "no samples".into()), None);
    }
    let e0 = c.e0();
    if e0 == 0.0 {
        return (CheckResult::skipped(ID, "E_m(0) = 0, no interval to find".into()), None);
    }
    let half = 0.5 * e0;
    if c.u[0] >= half {
        return (
            CheckResult::skipped(
                ID,
                format!(
                    "|u0|_Hm = {:.6e} is not below E_m(0)/2 = {half:.6e}; the initial-interval claim does not follow from 1/4 |u0|_Hm <= E_m(0)",
                    c.u[0]
                ),
            ),
            None,
        );
    }
    let mut tr = Tracker::new(ID);
    tr.observe(0.0, (half - c.u[0]) / e0, 0.0);
    // the interval must reach at least the first sample after t = 0
    if c.len() > 1 {
        tr.observe(c.t[1], (half - c.u[1]) / e0, 0.0);
    }
    let t1 = c
        .u
        .iter()
        .position(|&u| u > half)
        .map(|i| c.t[i - 1])
        .unwrap_or(c.t[c.len() - 1]);
    (tr.finish(), Some(t1))
}

/// `E_m(t) <= (1 − ε′)E_m(0)` on `[T₁, t_end]` and `½‖u(t_end)‖² < E_m²(0)`.
pub fn check_improved_estimates<T: Real>(traj: &Trajectory<T>, bp: Option<&BootstrapParams<T>>) -> CheckResult {
    const ID: &str = "improved_estimates";
    let Some(bp) = bp else {
        return CheckResult::skipped(ID, "no bootstrap parameters (E_m(0) = 0 or bootstrap disabled)".into());
    };
    let c = Columns::new(&traj.samples);
    let eps = c.source_amplitude();
    let budget = bp.budget().to_f64_lossy();
    if eps >= budget {
        return CheckResult::skipped(
            ID,
            format!("budget exceeded: sup |a|_Hm = {eps:.6e} >= min(eps1, eps2) = {budget:.6e}"),
        );
    }
    let t1 = bp.t1.to_f64_lossy();
    let n = c.len();
    if n == 0 || c.t[n - 1] < t1 {
        return CheckResult::skipped(ID, format!("trajectory ends before T1 = {t1}"));
    }
    let e0 = c.e0();
    let ceiling = (1.0 - bp.eps_prime.to_f64_lossy()) * e0;
    let mut tr = Tracker::new(ID);
    for i in (0..n).filter(|&i| c.t[i] >= t1) {
        tr.observe(c.t[i], normalized(ceiling - c.e(i), e0), ROUNDING_TOL);
    }
    // strict inequality at the final time
    let lhs = 0.5 * c.u[n - 1] * c.u[n - 1];
    tr.observe(c.t[n - 1], normalized(e0 * e0 - lhs, e0 * e0), 0.0);
    tr.finish()
}

fn zero_mean_initial<T: Real>(traj: &Trajectory<T>) -> Option<String> {
    let (m0, m1) = traj.initial_means;
    let (m0, m1) = (m0.to_f64_lossy(), m1.to_f64_lossy());
    if m0.abs() > ROUNDING_TOL || m1.abs() > ROUNDING_TOL {
        Some(format!("initial data have nonzero mean (u0: {m0:.3e}, u1: {m1:.3e})"))
    } else {
        None
    }
}

/// Recorded mean against the quadrature of the mean-mode equation.
pub fn check_mean_mode<T: Real>(traj: &Trajectory<T>, rel_tol: f64) -> CheckResult {
    const ID: &str = "mean_mode";
    if let Some(reason) = zero_mean_initial(traj) {
        return CheckResult::skipped(ID, reason);
    }
    let reference = match mean_mode_reference(traj) {
        Ok(r) => r,
        Err(e) => return CheckResult::skipped(ID, e.to_string()),
    };
    let scale = reference.iter().map(|(_, v)| v.to_f64_lossy().abs()).fold(0.0, f64::max);
    let mut tr = Tracker::new(ID);
    for ((t, r), s) in reference.iter().zip(&traj.samples) {
        let diff = (s.u_mean.to_f64_lossy() - r.to_f64_lossy()).abs();
        tr.observe(t.to_f64_lossy(), normalized(-diff, scale), rel_tol);
    }
    tr.finish()
}

/// Largest discrepancy `|ū − ū_ref|` over the samples.
pub fn mean_mode_discrepancy<T: Real>(traj: &Trajectory<T>) -> crate::Result<f64> {
    let reference = mean_mode_reference(traj)?;
    Ok(reference
        .iter()
        .zip(&traj.samples)
        .map(|((_, r), s)| (s.u_mean - *r).abs().to_f64_lossy())
        .fold(0.0, f64::max))
}

/// `|ū(t)| <= ε C(δ) / (2Ω)`.
pub fn check_mean_mode_bound<T: Real>(traj: &Trajectory<T>, bp: Option<&BootstrapParams<T>>) -> CheckResult {
    const ID: &str = "mean_mode.bound";
    if let Some(reason) = zero_mean_initial(traj) {
        return CheckResult::skipped(ID, reason);
    }
    let Some(bp) = bp else {
        return CheckResult::skipped(ID, "no bootstrap parameters, C(delta) unknown".into());
    };
    let c = Columns::new(&traj.samples);
    let bound = c.source_amplitude() * bp.c_delta.to_f64_lossy() / (2.0 * omega(traj));
    let mut tr = Tracker::new(ID);
    for i in 0..c.len() {
        tr.observe(c.t[i], normalized(bound - c.u_mean[i].abs(), bound), ROUNDING_TOL);
    }
    tr.finish()
}

/// Long-time behaviour: `‖∂ₜu‖_{H^m}` over the last tenth of the run and
/// `‖u(t_end) − c₀‖_{H^m}` below `tol`. Returns the results and `c₀ ≈ ū(t_end)`.
pub fn check_asymptotics<T: Real>(traj: &Trajectory<T>, tol: f64) -> (Vec<CheckResult>, Option<f64>) {
    const DECAY: &str = "asymptotics.ut_decay";
    const FLAT: &str = "asymptotics.flattening";
    let c = Columns::new(&traj.samples);
    let n = c.len();
    let c0 = (n > 0).then(|| c.u_mean[n - 1]);
    let om = omega(traj);
    let skip = if n == 0 {
        Some("no samples".to_string())
    } else if let Some(b) = &traj.breakdown {
        Some(format!("integration stopped at t = {}", b.t))
    } else if c.t[n - 1] < 20.0 / om {
        Some(format!(
            "t_end = {} is shorter than 20/omega = {}",
            c.t[n - 1],
            20.0 / om
        ))
    } else {
        None
    };
    if let Some(reason) = skip {
        return (
            vec![CheckResult::skipped(DECAY, reason.clone()), CheckResult::skipped(FLAT, reason)],
            c0,
        );
    }
    let start = (9 * n) / 10;
    let mut decay = Tracker::new(DECAY);
    let mut running = 0.0f64;
    for i in start..n {
        running = running.max(c.ut[i]);
        decay.observe(c.t[i], -running, tol);
    }
    let mut flat = Tracker::new(FLAT);
    flat.observe(c.t[n - 1], -c.u_osc[n - 1], tol);
    (vec![decay.finish(), flat.finish()], c0)
}

/// `𝔼²(t) <= e^{−4Ω(t−t₀)}𝔼²(t₀) + ∫ e^{−4Ω(t−τ)}(2Ω‖∇u‖² + ‖∂ₜu‖‖F‖) dτ`.
pub fn check_standard_energy_bound<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let c = Columns::new(&traj.samples);
    let om = omega(traj);
    let f: Vec<f64> = (0..c.len())
        .map(|i| 2.0 * om * c.grad_u[i] * c.grad_u[i] + c.ut[i] * c.f[i])
        .collect();
    let floor = c.e_std_sq.first().copied().unwrap_or(0.0);
    integral_check("asymptotics.standard_energy_bound", &c.t, &c.e_std_sq, -4.0 * om, &f, floor)
}

/// `‖u‖_{H^m} <= (√8/Ω) E_m`.
pub fn check_l2_control<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let c = Columns::new(&traj.samples);
    let k = 8f64.sqrt() / omega(traj);
    let mut tr = Tracker::new("energy.l2_control");
    for i in 0..c.len() {
        let rhs = k * c.e(i);
        tr.observe(c.t[i], normalized(rhs - c.u[i], rhs), ROUNDING_TOL);
    }
    tr.finish()
}

/// `‖∂ₜu + (Ω/2)u‖_{H^m} <= √2 E_m`.
pub fn check_damped_combination<T: Real>(traj: &Trajectory<T>) -> CheckResult {
    let c = Columns::new(&traj.samples);
    let mut tr = Tracker::new("energy.damped_combination");
    for i in 0..c.len() {
        let rhs = 2f64.sqrt() * c.e(i);
        tr.observe(c.t[i], normalized(rhs - c.damped[i], rhs), ROUNDING_TOL);
    }
    tr.finish()
}

/// `‖F(t)‖_{H^m} <= C(δ) e^{−κt} ‖a(t)‖_{H^m}` while the bootstrap
/// assumption holds. Also returns the measured ratio `sup ‖F‖ / (e^{−κt}‖a‖)`.
pub fn check_source_bound<T: Real>(
    traj: &Trajectory<T>,
    bp: Option<&BootstrapParams<T>>,
) -> (CheckResult, Option<f64>) {
    const ID: &str = "source.norm_bound";
    let c = Columns::new(&traj.samples);
    let kappa = traj.params.kappa.to_f64_lossy();
    let measured = (0..c.len())
        .filter(|&i| c.a[i] > 0.0)
        .map(|i| c.f[i] / ((-kappa * c.t[i]).exp() * c.a[i]))
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let Some(bp) = bp else {
        return (CheckResult::skipped(ID, "no bootstrap parameters, C(delta) unknown".into()), measured);
    };
    if c.source_amplitude() == 0.0 {
        return (CheckResult::skipped(ID, "source vanishes identically".into()), measured);
    }
    let e0_sq = c.e_sq.first().copied().unwrap_or(0.0);
    let cd = bp.c_delta.to_f64_lossy();
    let mut tr = Tracker::new(ID);
    for i in (0..c.len()).filter(|&i| 0.5 * c.u[i] * c.u[i] <= e0_sq) {
        let rhs = cd * (-kappa * c.t[i]).exp() * c.a[i];
        tr.observe(c.t[i], normalized(rhs - c.f[i], rhs), ROUNDING_TOL);
    }
    (tr.finish(), measured)
}
