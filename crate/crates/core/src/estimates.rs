//! Gronwall bounds, the fractional-power constant, and the threshold
//! functions of the global existence argument.

use crate::calibrate::Constants;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Samples on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Series(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Series("times must be strictly increasing".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Series("non-finite sample".into()));
        }
        Ok(Self { times, values })
    }

    /// Sample `f` on `times`.
    pub fn from_fn(times: Vec<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.times == other.times
    }
}

/// Right-hand side of the Gronwall inequality for `g' <= A g + f`,
///
/// ```text
/// g(t) <= e^{∫_{t₀}^t A} g(t₀) + ∫_{t₀}^t e^{∫_s^t A} f(s) ds,
/// ```
///
/// at every sample from `t₀` on, with trapezoid quadrature. `t₀` must be
/// one of the sample times.
pub fn gronwall_bound<T: Real>(a: &TimeSeries<T>, f: &TimeSeries<T>, g0: T, t0: T) -> Result<TimeSeries<T>> {
    if !a.same_grid(f) {
        return Err(Error::Series("A and f are sampled on different time grids".into()));
    }
    if f.values.iter().any(|&v| v < T::zero()) {
        return Err(Error::Series("the forcing f must be nonnegative".into()));
    }
    let tol = T::lit(1e-12) * (T::one() + t0.abs());
    let start = a
        .times
        .iter()
        .position(|&t| (t - t0).abs() <= tol)
        .ok_or_else(|| Error::Series(format!("t0 = {t0} is not a sample time")))?;
    let half = T::lit(0.5);
    let ts = &a.times[start..];
    let av = &a.values[start..];
    let fv = &f.values[start..];
    let mut out = Vec::with_capacity(ts.len());
    let mut hom = g0;
    let mut forced = T::zero();
    out.push(g0);
    for i in 1..ts.len() {
        let h = ts[i] - ts[i - 1];
        // growth factor e^{∫ A} over the step, A by trapezoid
        let growth = (half * h * (av[i] + av[i - 1])).exp();
        hom *= growth;
        forced = growth * forced + half * h * (growth * fv[i - 1] + fv[i]);
        out.push(hom + forced);
    }
    TimeSeries::new(ts.to_vec(), out)
}

/// `C_{m,μ,δ′}` such that `‖(1+u)^μ‖_{H^m} <= C ‖u‖_{H^m} + (2π)^{3/2}`
/// whenever `‖u‖_{L^∞} <= δ′`.
///
/// `moser[k-1]` is the combinatorial constant `C_k` of the composition
/// estimate for derivatives of order `k`.
pub fn fractional_constant<T: Real>(m: u32, mu: T, delta_prime: T, moser: &[T]) -> Result<T> {
    if m < 1 {
        return Err(Error::Parameter("fractional constant needs m >= 1".into()));
    }
    if !(delta_prime > T::zero() && delta_prime < T::one()) {
        return Err(Error::Parameter(format!("delta' must lie in (0, 1), got {delta_prime}")));
    }
    if moser.len() < m as usize {
        return Err(Error::Parameter(format!(
            "{} Moser constants supplied, order m = {m} needs {m}",
            moser.len()
        )));
    }
    let (lo, hi) = (T::one() - delta_prime, T::one() + delta_prime);
    // c_l bounds |F^{(l)}| on [−δ′, δ′] for F(x) = (1+x)^μ
    let c = |l: u32| {
        let falling = (0..l).fold(T::one(), |acc, j| acc * (mu - T::lit(j as f64)));
        let lf = T::lit(l as f64);
        let base = if mu >= lf { hi } else { lo };
        falling.abs() * base.powf(mu - lf)
    };
    let m_mu = mu.abs() * lo.powf(mu - T::one()).max(hi.powf(mu - T::one()));
    let mut best = m_mu;
    let mut m_k = T::zero();
    for k in 1..=m {
        m_k = m_k.max(c(k) * hi.powi(k as i32 - 1));
        best = best.max(moser[k as usize - 1] * m_k);
    }
    Ok(best)
}

fn check_omega_below_one<T: Real>(omega: T) -> Result<()> {
    if !(omega > T::zero() && omega < T::one()) {
        return Err(Error::Parameter(format!(
            "the threshold functions need 0 < omega < 1, got omega = {omega}"
        )));
    }
    Ok(())
}

/// `h(t) = (1 − e^{−Ωt})(1 − Ω)`, the ceiling for `ε′`.
pub fn h_threshold<T: Real>(omega: T, t1: T) -> Result<T> {
    check_omega_below_one(omega)?;
    if !(t1 >= T::zero()) {
        return Err(Error::Domain(format!("h needs t >= 0, got {t1}")));
    }
    Ok(-(-omega * t1).exp_m1() * (T::one() - omega))
}

/// `g(t) = (1 − Ω) − ε′ / (1 − e^{−Ωt})`.
pub fn g_function<T: Real>(t: T, omega: T, eps_prime: T) -> Result<T> {
    check_omega_below_one(omega)?;
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("g is undefined at t = {t} <= 0")));
    }
    Ok(T::one() - omega - eps_prime / -(-omega * t).exp_m1())
}

/// Quotient form `[e^{Ωt}(1 − ε′ − Ω) − (1 − Ω)] / (e^{Ωt} − 1)` of `g`.
pub fn g_function_quotient<T: Real>(t: T, omega: T, eps_prime: T) -> Result<T> {
    check_omega_below_one(omega)?;
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("g is undefined at t = {t} <= 0")));
    }
    let e = (omega * t).exp();
    Ok((e * (T::one() - eps_prime - omega) - (T::one() - omega)) / (omega * t).exp_m1())
}

/// `dg/dt = ε′ Ω e^{−Ωt} / (1 − e^{−Ωt})²`.
pub fn g_derivative<T: Real>(t: T, omega: T, eps_prime: T) -> Result<T> {
    check_omega_below_one(omega)?;
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("g is undefined at t = {t} <= 0")));
    }
    let d = -(-omega * t).exp_m1();
    Ok(eps_prime * omega * (-omega * t).exp() / (d * d))
}

/// Constants of the bootstrap argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapParams<T> {
    /// `E_m(0)`
    pub e_m0: T,
    /// `δ` with `E_m(0) <= δΩ`.
    pub delta: T,
    /// Sup-norm ceiling `δ′ < 1` for the solution.
    pub delta_prime: T,
    pub t1: T,
    pub eps_prime: T,
    /// Budget `ε₁` for the improved energy estimate.
    pub eps1: T,
    /// Budget `ε₂` for the strict bootstrap inequality.
    pub eps2: T,
    /// Bound `C(δ)` on `‖F‖_{H^m} / ‖a‖_{H^m}`.
    pub c_delta: T,
}

impl<T: Real> BootstrapParams<T> {
    /// Admissible source amplitudes are those below `min(ε₁, ε₂)`.
    pub fn budget(&self) -> T {
        self.eps1.min(self.eps2)
    }

    pub fn validate(&self, omega: T) -> Result<()> {
        let positive = [
            ("E_m(0)", self.e_m0),
            ("delta", self.delta),
            ("T1", self.t1),
            ("C(delta)", self.c_delta),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > T::zero())) {
            return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
        }
        if !(self.delta_prime > T::zero() && self.delta_prime < T::one()) {
            return Err(Error::Parameter(format!(
                "delta' must lie in (0, 1), got {}",
                self.delta_prime
            )));
        }
        if !(self.eps_prime > T::zero() && self.eps_prime < T::one()) {
            return Err(Error::Parameter(format!(
                "eps' must lie in (0, 1), got {}",
                self.eps_prime
            )));
        }
        let h = h_threshold(omega, self.t1)?;
        if self.eps_prime >= h {
            return Err(Error::Parameter(format!(
                "eps' = {} is not below h(T1) = {h}; no admissible improvement exists",
                self.eps_prime
            )));
        }
        // E_m(0) <= δΩ, up to rounding in the automatic choice δ = E_m(0)/Ω
        if self.e_m0 > self.delta * omega * (T::one() + T::lit(1e-12)) {
            return Err(Error::Parameter(format!(
                "E_m(0) = {} exceeds delta * omega = {}",
                self.e_m0,
                self.delta * omega
            )));
        }
        Ok(())
    }
}

/// `(ε₁_max, ε₂_max)` with
///
/// ```text
/// ε₁_max = Ω g(T₁) E_m(0) / (√2 C(δ))
/// ε₂_max = (2Ω / C(δ)) √(2(ε′ − ¾ε′²)) E_m(0)
/// ```
///
/// clamped at zero.
pub fn epsilon_budgets<T: Real>(bp: &BootstrapParams<T>, omega: T) -> Result<(T, T)> {
    let h = h_threshold(omega, bp.t1)?;
    if bp.eps_prime >= h {
        return Err(Error::Parameter(format!(
            "eps' = {} is not below h(T1) = {h}; g(T1) <= 0 leaves no budget",
            bp.eps_prime
        )));
    }
    if !(bp.c_delta > T::zero()) {
        return Err(Error::Parameter(format!("C(delta) must be positive, got {}", bp.c_delta)));
    }
    let g = g_function(bp.t1, omega, bp.eps_prime)?.max(T::zero());
    let eps1 = omega * g * bp.e_m0 / (T::SQRT_2() * bp.c_delta);
    let inner = (T::lit(2.0) * (bp.eps_prime - T::lit(0.75) * bp.eps_prime * bp.eps_prime)).max(T::zero());
    let eps2 = T::lit(2.0) * omega / bp.c_delta * inner.sqrt() * bp.e_m0;
    Ok((eps1.max(T::zero()), eps2.max(T::zero())))
}

/// Bootstrap choices; `None` means automatic.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BootstrapInputs<T> {
    pub t1: Option<T>,
    pub eps_prime: Option<T>,
    pub delta: Option<T>,
    pub delta_prime: Option<T>,
}

/// `C(δ) = C_alg (C_{m,μ,δ′} √2 E_m(0) + (2π)^{3/2})`.
///
/// Under the bootstrap assumption `‖u‖_{H^m} <= √2 E_m(0)`, so the
/// fractional-power estimate bounds `‖(1+u)^μ‖_{H^m}` by the bracket and
/// the algebra property turns that into a bound on `‖F‖ / ‖a‖`.
pub fn c_delta_bound<T: Real>(e_m0: T, frac_constant: T, c_algebra: T) -> T {
    c_algebra * (frac_constant * T::SQRT_2() * e_m0 + T::torus_volume().sqrt())
}

/// Fill in automatic choices and compute the budgets.
///
/// Defaults: `T₁ = 1/Ω`, `ε′ = h(T₁)/2`, `δ = E_m(0)/Ω`,
/// `δ′ = C_sob √2 E_m(0)`.
pub fn resolve_bootstrap<T: Real>(
    inputs: &BootstrapInputs<T>,
    omega: T,
    mu: T,
    m: u32,
    e_m0: T,
    constants: &Constants,
) -> Result<BootstrapParams<T>> {
    check_omega_below_one(omega)?;
    if !(e_m0 > T::zero()) {
        return Err(Error::Parameter(format!(
            "the bootstrap needs E_m(0) > 0, got {e_m0}"
        )));
    }
    let t1 = inputs.t1.unwrap_or(omega.recip());
    let h = h_threshold(omega, t1)?;
    let eps_prime = inputs.eps_prime.unwrap_or(h * T::lit(0.5));
    let delta = inputs.delta.unwrap_or(e_m0 / omega);
    let delta_prime = match inputs.delta_prime {
        Some(d) => d,
        None => T::lit(constants.c_sobolev) * T::SQRT_2() * e_m0,
    };
    if !(delta_prime < T::one()) {
        return Err(Error::Parameter(format!(
            "delta' = {delta_prime} is not below 1; the initial energy is too large for the fractional power estimate"
        )));
    }
    let moser: Vec<T> = constants.moser.iter().map(|&c| T::lit(c)).collect();
    let frac = fractional_constant(m, mu, delta_prime, &moser)?;
    let c_delta = c_delta_bound(e_m0, frac, T::lit(constants.c_algebra));
    let mut bp = BootstrapParams {
        e_m0,
        delta,
        delta_prime,
        t1,
        eps_prime,
        eps1: T::zero(),
        eps2: T::zero(),
        c_delta,
    };
    bp.validate(omega)?;
    let (eps1, eps2) = epsilon_budgets(&bp, omega)?;
    bp.eps1 = eps1;
    bp.eps2 = eps2;
    Ok(bp)
}
