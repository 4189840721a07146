//! The source term `F(t, x, u) = e^{−κt} a(t,x) (1+u)^μ`.
//!
//! `a` is either an analytic preset `σ(t) A(x)`, a time-indexed set of grid
//! samples, or the profile generated by an irrotational perfect fluid with
//! equation of state `p = K ε`. The exponents `κ`, `μ` follow from `K` and
//! the damping rate `Ω` via [`derive_exponents`].

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::torus::{sobolev_norm, Field, GridSpec};

/// Scalar constants of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Damping / cosmological rate `Ω > 0`.
    pub omega: T,
    /// Decay rate `κ > 0` of the source prefactor.
    pub kappa: T,
    /// Nonlinearity exponent `μ`.
    pub mu: T,
    /// Equation-of-state constant `K ∈ (0, 1)` when the exponents come from a fluid.
    pub k_eos: Option<T>,
    /// Sobolev order used for every norm and energy.
    pub m: u32,
}

impl<T: Real> ModelParams<T> {
    pub fn new(omega: T, kappa: T, mu: T, m: u32) -> Result<Self> {
        let p = Self {
            omega,
            kappa,
            mu,
            k_eos: None,
            m,
        };
        p.validate()?;
        Ok(p)
    }

    /// Exponents derived from the equation of state `p = K ε`.
    pub fn from_equation_of_state(k_eos: T, omega: T, m: u32) -> Result<Self> {
        let (kappa, mu) = derive_exponents(k_eos, omega)?;
        let p = Self {
            omega,
            kappa,
            mu,
            k_eos: Some(k_eos),
            m,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > T::zero()) || !self.omega.is_finite() {
            return Err(Error::Parameter(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.kappa > T::zero()) || !self.kappa.is_finite() {
            return Err(Error::Parameter(format!(
                "kappa must be positive so that e^(-kappa t) decays, got {}",
                self.kappa
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::Parameter("mu must be finite".into()));
        }
        if self.m < 3 {
            return Err(Error::Parameter(format!(
                "Sobolev order m must be at least 3 (m > n/2 on T^3), got {}",
                self.m
            )));
        }
        if let Some(k) = self.k_eos {
            let (kappa, mu) = derive_exponents(k, self.omega)?;
            let tol = T::lit(1e-12);
            let close = |a: T, b: T| (a - b).abs() <= tol * (T::one() + b.abs());
            if !close(self.kappa, kappa) || !close(self.mu, mu) {
                return Err(Error::Parameter(format!(
                    "kappa = {}, mu = {} are inconsistent with K = {k}, which gives kappa = {kappa}, mu = {mu}",
                    self.kappa, self.mu
                )));
            }
        }
        Ok(())
    }

    /// The small-data global existence regime requires `0 < Ω < 1`.
    pub fn check_global_regime(&self) -> Result<()> {
        if self.omega >= T::one() {
            return Err(Error::Parameter(format!(
                "global existence requires 0 < omega < 1, got omega = {}",
                self.omega
            )));
        }
        Ok(())
    }

    /// `μ ∈ N`, for which `(1+u)^μ` needs no positivity of `1+u`.
    pub fn integer_power(&self) -> bool {
        self.mu >= T::zero() && self.mu.fract() == T::zero()
    }
}

/// `κ = (1−K)Ω/K`, `μ = (2K−1)/K` for `0 < K < 1`.
///
/// `κ` is stored positive so that `e^{−κt}` is the decaying factor
/// `e^{(K−1)Ωt/K}` of the fluid source.
pub fn derive_exponents<T: Real>(k_eos: T, omega: T) -> Result<(T, T)> {
    if !(k_eos > T::zero() && k_eos < T::one()) {
        return Err(Error::Parameter(format!(
            "equation-of-state constant must satisfy 0 < K < 1, got K = {k_eos}"
        )));
    }
    if !(omega > T::zero()) {
        return Err(Error::Parameter(format!("omega must be positive, got {omega}")));
    }
    let kappa = (T::one() - k_eos) * omega / k_eos;
    let mu = (T::lit(2.0) * k_eos - T::one()) / k_eos;
    Ok((kappa, mu))
}

/// Derivatives of the fluid potential `Φ` sampled at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidPotential<T> {
    pub phi_t: Field<T>,
    pub phi_grad: [Field<T>; 3],
}

impl<T: Real> FluidPotential<T> {
    pub fn new(phi_t: Field<T>, phi_grad: [Field<T>; 3]) -> Result<Self> {
        for g in &phi_grad {
            phi_t.grid().ensure_same(&g.grid())?;
        }
        Ok(Self { phi_t, phi_grad })
    }

    /// `∂ₜΦ = c₀ + c₁ cos(x₁ + x₂)`, `∇Φ = ∇ψ` for `ψ = −g (cos x₁ + cos x₂ + cos x₃)`.
    pub fn preset(grid: GridSpec, phi_t_mean: T, phi_t_wave: T, grad_amp: T) -> Result<Self> {
        let phi_t = Field::from_fn(grid, |x: [T; 3]| phi_t_mean + phi_t_wave * (x[0] + x[1]).cos())?;
        let comp = |axis: usize| Field::from_fn(grid, move |x: [T; 3]| grad_amp * x[axis].sin());
        Self::new(phi_t, [comp(0)?, comp(1)?, comp(2)?])
    }

    pub fn grid(&self) -> GridSpec {
        self.phi_t.grid()
    }

    /// `(∂ₜΦ)² − |∇Φ|²` at each grid point.
    pub fn bracket(&self) -> Vec<T> {
        (0..self.grid().len())
            .map(|i| {
                let pt = self.phi_t.values()[i];
                let g2: T = self.phi_grad.iter().map(|g| g.values()[i] * g.values()[i]).sum();
                pt * pt - g2
            })
            .collect()
    }

    pub fn scaled(&self, lambda: T) -> Self {
        Self {
            phi_t: self.phi_t.scaled(lambda),
            phi_grad: [
                self.phi_grad[0].scaled(lambda),
                self.phi_grad[1].scaled(lambda),
                self.phi_grad[2].scaled(lambda),
            ],
        }
    }
}

/// `a = (1/6)(3 − 1/K) [(∂ₜΦ)² − |∇Φ|²]^{(1+K)/(2K)}`.
pub fn fluid_source<T: Real>(potential: &FluidPotential<T>, k_eos: T) -> Result<Field<T>> {
    if !(k_eos > T::zero() && k_eos < T::one()) {
        return Err(Error::Parameter(format!(
            "equation-of-state constant must satisfy 0 < K < 1, got K = {k_eos}"
        )));
    }
    let bracket = potential.bracket();
    if let Some((index, &b)) = bracket.iter().enumerate().find(|(_, b)| !(**b > T::zero())) {
        return Err(Error::NotTimelike {
            index,
            value: b.to_f64_lossy(),
        });
    }
    let prefactor = (T::lit(3.0) - k_eos.recip()) / T::lit(6.0);
    let exponent = (T::one() + k_eos) / (T::lit(2.0) * k_eos);
    Field::new(
        potential.grid(),
        bracket.into_iter().map(|b| prefactor * b.powf(exponent)).collect(),
    )
}

/// Spatial profile of an analytic source preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialPreset {
    Uniform,
    /// `cos(n·x)`
    Mode { wavevector: [i64; 3] },
    /// Periodic bump `exp((cos x₁ + cos x₂ + cos x₃ − 3) / w²)`.
    Bump { width: f64 },
}

impl SpatialPreset {
    pub fn sample<T: Real>(&self, grid: GridSpec) -> Result<Field<T>> {
        match *self {
            SpatialPreset::Uniform => Ok(Field::constant(grid, T::one())),
            SpatialPreset::Mode { wavevector } => {
                let n = wavevector.map(|w| T::lit(w as f64));
                Field::from_fn(grid, move |x| (n[0] * x[0] + n[1] * x[1] + n[2] * x[2]).cos())
            }
            SpatialPreset::Bump { width } => {
                if !(width > 0.0) {
                    return Err(Error::Parameter(format!("bump width must be positive, got {width}")));
                }
                let w2 = T::lit(width * width);
                Field::from_fn(grid, move |x: [T; 3]| {
                    ((x[0].cos() + x[1].cos() + x[2].cos() - T::lit(3.0)) / w2).exp()
                })
            }
        }
    }
}

/// Time envelope `σ(t)` with `|σ| <= 1` and `σ(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile<T> {
    Constant,
    Exponential { rate: T },
    Cosine { frequency: T },
}

impl<T: Real> TimeProfile<T> {
    pub fn at(&self, t: T) -> T {
        match *self {
            TimeProfile::Constant => T::one(),
            TimeProfile::Exponential { rate } => (-rate * t).exp(),
            TimeProfile::Cosine { frequency } => (frequency * t).cos(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TimeProfile::Exponential { rate } if rate < T::zero() => Err(Error::Parameter(format!(
                "exponential time profile needs a nonnegative rate, got {rate}"
            ))),
            _ => Ok(()),
        }
    }
}

/// What `a(t,x)` is built from.
#[derive(Debug, Clone, PartialEq)]
pub enum SourcePayload<T> {
    Zero,
    Preset {
        spatial: SpatialPreset,
        time: TimeProfile<T>,
    },
    /// Samples at increasing times; linear in between, held constant outside.
    Samples { times: Vec<T>, fields: Vec<Field<T>> },
    /// Static fluid profile evaluated from `Φ` at `t = 0`.
    Fluid { potential: FluidPotential<T> },
}

/// Source description. When `amplitude` is set, `a` is rescaled so that
/// `sup_t ‖a(t,·)‖_{H^m}` equals it.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec<T> {
    pub payload: SourcePayload<T>,
    pub amplitude: Option<T>,
}

impl<T: Real> SourceSpec<T> {
    pub fn zero() -> Self {
        Self {
            payload: SourcePayload::Zero,
            amplitude: None,
        }
    }

    pub fn new(payload: SourcePayload<T>, amplitude: Option<T>) -> Self {
        Self { payload, amplitude }
    }

    /// Build the evaluable source on `grid` for the given model.
    pub fn realize(&self, grid: GridSpec, params: &ModelParams<T>) -> Result<Source<T>> {
        params.validate()?;
        if let Some(a) = self.amplitude {
            if !(a >= T::zero()) || !a.is_finite() {
                return Err(Error::Parameter(format!("source amplitude must be >= 0, got {a}")));
            }
        }
        let m = params.m;
        let rescale = |raw: T| -> Result<Option<T>> {
            match self.amplitude {
                None => Ok(None),
                Some(target) if raw > T::zero() => Ok(Some(target / raw)),
                Some(target) if target == T::zero() => Ok(Some(T::zero())),
                Some(_) => Err(Error::Parameter(
                    "source profile vanishes identically and cannot be scaled to a positive amplitude".into(),
                )),
            }
        };
        let profile = match &self.payload {
            SourcePayload::Zero => Profile::Zero,
            SourcePayload::Preset { spatial, time } => {
                time.validate()?;
                let shape = spatial.sample::<T>(grid)?;
                let norm = sobolev_norm(&shape, m)?;
                let shape = match rescale(norm)? {
                    Some(c) => shape.scaled(c),
                    None => shape,
                };
                Profile::Separable { shape, time: *time }
            }
            SourcePayload::Samples { times, fields } => {
                if times.is_empty() || times.len() != fields.len() {
                    return Err(Error::Parameter(
                        "source samples need one field per time and at least one sample".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Parameter("source sample times must be strictly increasing".into()));
                }
                let mut raw = T::zero();
                for f in fields {
                    grid.ensure_same(&f.grid())?;
                    raw = raw.max(sobolev_norm(f, m)?);
                }
                let fields = match rescale(raw)? {
                    Some(c) => fields.iter().map(|f| f.scaled(c)).collect(),
                    None => fields.clone(),
                };
                Profile::Samples {
                    times: times.clone(),
                    fields,
                }
            }
            SourcePayload::Fluid { potential } => {
                grid.ensure_same(&potential.grid())?;
                let k = params.k_eos.ok_or_else(|| {
                    Error::Parameter("the fluid source needs the equation-of-state constant K".into())
                })?;
                let raw_field = fluid_source(potential, k)?;
                let raw = sobolev_norm(&raw_field, m)?;
                let shape = match rescale(raw)? {
                    // a(λΦ) = λ^{(1+K)/K} a(Φ)
                    Some(c) if c > T::zero() => {
                        let lambda = c.powf(k / (T::one() + k));
                        fluid_source(&potential.scaled(lambda), k)?
                    }
                    Some(_) => Field::zeros(grid),
                    None => raw_field,
                };
                Profile::Separable {
                    shape,
                    time: TimeProfile::Constant,
                }
            }
        };
        Ok(Source {
            grid,
            kappa: params.kappa,
            mu: params.mu,
            integer_power: params.integer_power(),
            profile,
        })
    }
}

#[derive(Debug, Clone)]
enum Profile<T> {
    Zero,
    Separable { shape: Field<T>, time: TimeProfile<T> },
    Samples { times: Vec<T>, fields: Vec<Field<T>> },
}

/// A source ready for pointwise evaluation on one grid.
#[derive(Debug, Clone)]
pub struct Source<T> {
    grid: GridSpec,
    kappa: T,
    mu: T,
    integer_power: bool,
    profile: Profile<T>,
}

impl<T: Real> Source<T> {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile, Profile::Zero)
    }

    /// `a(t, ·)`.
    pub fn profile_at(&self, t: T) -> Field<T> {
        match &self.profile {
            Profile::Zero => Field::zeros(self.grid),
            Profile::Separable { shape, time } => shape.scaled(time.at(t)),
            Profile::Samples { times, fields } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return fields[0].clone();
                }
                if t >= times[last] {
                    return fields[last].clone();
                }
                let hi = times.partition_point(|&s| s <= t);
                let lo = hi - 1;
                let theta = (t - times[lo]) / (times[hi] - times[lo]);
                fields[lo]
                    .zip_with(&fields[hi], |a, b| (T::one() - theta) * a + theta * b)
                    .expect("sample grids checked at construction")
            }
        }
    }

    /// `F(t, ·, u) = e^{−κt} a(t,·) (1+u)^μ`.
    pub fn eval(&self, t: T, u: &Field<T>) -> Result<Field<T>> {
        self.grid.ensure_same(&u.grid())?;
        if self.is_zero() {
            return Ok(Field::zeros(self.grid));
        }
        if !self.integer_power {
            let u_min = u.min();
            if !(T::one() + u_min > T::zero()) {
                return Err(Error::Breakdown {
                    t: t.to_f64_lossy(),
                    u_min: u_min.to_f64_lossy(),
                });
            }
        }
        let a = self.profile_at(t);
        let decay = (-self.kappa * t).exp();
        let mu = self.mu;
        let power = |x: T| {
            if self.integer_power {
                x.powi(mu.to_i32().unwrap_or(0))
            } else {
                x.powf(mu)
            }
        };
        Field::new(
            self.grid,
            a.values()
                .iter()
                .zip(u.values())
                .map(|(&av, &uv)| decay * av * power(T::one() + uv))
                .collect(),
        )
    }
}

/// Free-function form of [`Source::eval`].
pub fn eval_source<T: Real>(t: T, u: &Field<T>, source: &Source<T>) -> Result<Field<T>> {
    source.eval(t, u)
}
