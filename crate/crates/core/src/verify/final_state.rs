//! Functional inequalities evaluated on the last state of a run.

use super::checks::ROUNDING_TOL;
use super::{normalized, CheckResult, Tracker};
use crate::calibrate::Constants;
use crate::estimates::{fractional_constant, BootstrapParams};
use crate::scalar::Real;
use crate::solver::SolverState;
use crate::source::ModelParams;
use crate::torus::{
    dealiased_product, gradient_l2_norm, mean_decompose, sobolev_norm, sobolev_norm_spectrum, Field, GridSpec,
    SpectralPlan,
};
use crate::Result;

fn to_f64<T: Real>(f: &Field<T>) -> Result<Field<f64>> {
    Field::new(f.grid(), f.values().iter().map(|v| v.to_f64_lossy()).collect())
}

/// `f` resampled on the grid of twice the resolution.
fn refine(f: &Field<f64>) -> Result<Field<f64>> {
    let fine = GridSpec::new(2 * f.grid().n())?;
    let s = SpectralPlan::new(f.grid()).forward(f)?.zero_pad(fine)?;
    SpectralPlan::new(fine).inverse(&s)
}

fn sup(f: &Field<f64>) -> f64 {
    f.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `‖v − v̄‖_{L²} <= ‖∇v‖_{L²}` for `u` and `∂ₜu`.
pub fn check_wirtinger<T: Real>(state: &SolverState<T>) -> Result<CheckResult> {
    let mut tr = Tracker::new("torus.wirtinger");
    let t = state.t.to_f64_lossy();
    for field in [&state.u, &state.ut] {
        let f = to_f64(field)?;
        let osc = mean_decompose(&f).oscillatory;
        let lhs = sobolev_norm(&osc, 0)?;
        let rhs = gradient_l2_norm(&SpectralPlan::new(f.grid()).forward(&f)?);
        tr.observe(t, normalized(rhs - lhs, rhs), ROUNDING_TOL);
    }
    Ok(tr.finish())
}

/// `‖uv‖_{H^m} <= C_alg ‖u‖_{H^m}‖v‖_{H^m}` for the pairs `(u, u)` and `(u, ∂ₜu)`.
pub fn check_algebra<T: Real>(state: &SolverState<T>, m: u32, constants: &Constants) -> Result<CheckResult> {
    let mut tr = Tracker::new("torus.algebra");
    let t = state.t.to_f64_lossy();
    let u = to_f64(&state.u)?;
    let ut = to_f64(&state.ut)?;
    let u_hm = sobolev_norm(&u, m)?;
    for (v, v_hm) in [(&u, u_hm), (&ut, sobolev_norm(&ut, m)?)] {
        let lhs = sobolev_norm_spectrum(&dealiased_product(&u, v)?, m);
        let rhs = constants.c_algebra * u_hm * v_hm;
        tr.observe(t, normalized(rhs - lhs, rhs), ROUNDING_TOL);
    }
    Ok(tr.finish())
}

/// `‖u‖_{L^∞} <= C_sob ‖u‖_{H^m}`, sup taken on the refined grid.
pub fn check_sobolev<T: Real>(state: &SolverState<T>, m: u32, constants: &Constants) -> Result<CheckResult> {
    let mut tr = Tracker::new("torus.sobolev_embedding");
    let u = to_f64(&state.u)?;
    let rhs = constants.c_sobolev * sobolev_norm(&u, m)?;
    let lhs = sup(&refine(&u)?);
    tr.observe(state.t.to_f64_lossy(), normalized(rhs - lhs, rhs), ROUNDING_TOL);
    Ok(tr.finish())
}

/// `‖(1+u)^μ‖_{H^m} <= C_{m,μ,δ′}‖u‖_{H^m} + (2π)^{3/2}` when `‖u‖_{L^∞} <= δ′`.
pub fn check_fractional<T: Real>(
    state: &SolverState<T>,
    params: &ModelParams<T>,
    bp: Option<&BootstrapParams<T>>,
    constants: &Constants,
) -> Result<CheckResult> {
    const ID: &str = "estimates.fractional_power";
    let Some(bp) = bp else {
        return Ok(CheckResult::skipped(ID, "no bootstrap parameters, delta' unknown".into()));
    };
    let m = params.m;
    let mu = params.mu.to_f64_lossy();
    let dp = bp.delta_prime.to_f64_lossy();
    let u = to_f64(&state.u)?;
    let fine = refine(&u)?;
    let s = sup(&fine);
    if s > dp {
        return Ok(CheckResult::skipped(
            ID,
            format!("|u|_inf = {s:.6e} exceeds delta' = {dp:.6e}"),
        ));
    }
    let composed = fine.map(|x| (1.0 + x).powf(mu))?;
    let lhs = sobolev_norm(&composed, m)?;
    let c = fractional_constant(m, mu, dp, &constants.moser)?;
    let rhs = c * sobolev_norm(&u, m)? + f64::torus_volume().sqrt();
    let mut tr = Tracker::new(ID);
    tr.observe(state.t.to_f64_lossy(), normalized(rhs - lhs, rhs), ROUNDING_TOL);
    Ok(tr.finish())
}
