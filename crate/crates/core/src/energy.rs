//! Energy functionals of the damped wave equation.
//!
//! The modified energy of a single field pair is
//!
//! ```text
//! 𝓔²[v] = ½ ∫ (∂ₜv)² + Ω v ∂ₜv + ½Ω² v² dx + ½ ∫ |∇v|² dx
//! ```
//!
//! and `E_m² = Σ_{|α|<=m} 𝓔²[∂_α u]`. Both quadratic forms diagonalise in
//! Fourier space, so `E_m²` is evaluated as a weighted sum over modes with
//! the `H^m` symbol `W_m(n)` as weight.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::{Field, SobolevWeights, SpectralPlan, Spectrum};

/// One row of diagnostics recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergySample<T> {
    pub t: T,
    /// `E_m²`
    pub e_m_sq: T,
    /// Standard wave energy `½(‖∂ₜu‖²_{H^m} + ‖∇u‖²_{H^m})`.
    pub e_std_sq: T,
    pub u_hm: T,
    pub ut_hm: T,
    pub f_hm: T,
    pub u_mean: T,
    pub f_mean: T,
    pub u_min: T,
    pub u_sup: T,
    pub grad_u_hm: T,
    /// `‖u − ū‖_{H^m}`
    pub u_osc_hm: T,
    /// `‖u‖_{H^{m+1}}`, tracks the extra derivative of the solution class.
    pub u_hm1: T,
    /// `‖a(t,·)‖_{H^m}`
    pub a_hm: T,
    /// `‖∂ₜu + (Ω/2) u‖_{H^m}`
    pub damped_hm: T,
}

impl<T: Real> EnergySample<T> {
    #[inline]
    pub fn e_m(&self) -> T {
        self.e_m_sq.max(T::zero()).sqrt()
    }
}

fn check_omega<T: Real>(omega: T) -> Result<()> {
    if !(omega > T::zero()) {
        return Err(Error::Parameter(format!(
            "damping rate omega must be positive, got {omega}"
        )));
    }
    Ok(())
}

/// Per-mode integrand of `E_m²` without the `(2π)³` and `W_m` factors.
#[inline]
fn mode_density<T: Real>(u: Complex<T>, ut: Complex<T>, omega: T, n_sq: T) -> T {
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    half * ut.norm_sqr()
        + half * omega * (u * ut.conj()).re
        + quarter * omega * omega * u.norm_sqr()
        + half * n_sq * u.norm_sqr()
}

/// Evaluates energies and norms for one grid and Sobolev order, reusing
/// the transform plan and weight tables.
#[derive(Debug, Clone)]
pub struct EnergyEvaluator<T: Real> {
    plan: SpectralPlan<T>,
    weights: SobolevWeights<T>,
}

impl<T: Real> EnergyEvaluator<T> {
    pub fn new(plan: SpectralPlan<T>, m: u32) -> Self {
        let weights = SobolevWeights::new(plan.grid(), m);
        Self { plan, weights }
    }

    #[inline]
    pub fn weights(&self) -> &SobolevWeights<T> {
        &self.weights
    }

    #[inline]
    pub fn plan(&self) -> &SpectralPlan<T> {
        &self.plan
    }

    pub fn modified_energy_spectral(&self, u: &Spectrum<T>, ut: &Spectrum<T>, omega: T) -> T {
        let sum: T = u
            .coeffs()
            .iter()
            .zip(ut.coeffs())
            .zip(self.weights.weights().iter().zip(self.weights.n_sq()))
            .map(|((&a, &b), (&w, &k2))| w * mode_density(a, b, omega, k2))
            .sum();
        T::torus_volume() * sum
    }

    pub fn standard_energy_spectral(&self, u: &Spectrum<T>, ut: &Spectrum<T>) -> T {
        T::lit(0.5) * (self.weights.norm_sq(ut) + self.weights.grad_norm_sq(u))
    }
}

/// `E_m²` of the pair `(u, ∂ₜu)`.
pub fn modified_energy<T: Real>(u: &Field<T>, ut: &Field<T>, omega: T, m: u32) -> Result<T> {
    check_omega(omega)?;
    u.grid().ensure_same(&ut.grid())?;
    let ev = EnergyEvaluator::new(SpectralPlan::new(u.grid()), m);
    let su = ev.plan.forward(u)?;
    let sut = ev.plan.forward(ut)?;
    Ok(ev.modified_energy_spectral(&su, &sut, omega))
}

/// `𝔼² = ½(‖∂ₜu‖²_{H^m} + ‖∇u‖²_{H^m})`.
pub fn standard_energy<T: Real>(u: &Field<T>, ut: &Field<T>, m: u32) -> Result<T> {
    u.grid().ensure_same(&ut.grid())?;
    let ev = EnergyEvaluator::new(SpectralPlan::new(u.grid()), m);
    let su = ev.plan.forward(u)?;
    let sut = ev.plan.forward(ut)?;
    Ok(ev.standard_energy_spectral(&su, &sut))
}

/// `‖∂ₜu + (Ω/2) u‖_{L²}`.
pub fn damped_combination_norm<T: Real>(u: &Field<T>, ut: &Field<T>, omega: T) -> Result<T> {
    check_omega(omega)?;
    let half_omega = omega * T::lit(0.5);
    let w = ut.zip_with(u, |b, a| b + half_omega * a)?;
    crate::torus::sobolev_norm(&w, 0)
}
