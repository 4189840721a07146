//! A complete run description: grid, model, source, initial data, solver
//! settings and bootstrap choices, plus the flagship and zero presets.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calibrate::Constants;
use crate::energy::modified_energy;
use crate::error::{Error, Result};
use crate::estimates::{resolve_bootstrap, BootstrapInputs, BootstrapParams};
use crate::scalar::Real;
use crate::solver::{simulate, SolverConfig, Trajectory};
use crate::source::{FluidPotential, ModelParams, Source, SourcePayload, SourceSpec};
use crate::torus::random::BandLimited;
use crate::torus::{mean_decompose, Field, GridSpec, SpectralPlan, Spectrum};
use crate::verify::{run_all, VerificationReport, VerifyOptions};

/// One initial field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldPreset {
    Zero,
    /// `amplitude · cos(n·x + phase)`
    Mode {
        wavevector: [i64; 3],
        amplitude: f64,
        phase: f64,
    },
    /// Periodic bump with its mean removed.
    Bump { width: f64, amplitude: f64 },
    /// Fourier coefficients `(n, Re û_n, Im û_n)`; the conjugate mode is
    /// filled in so the field is real.
    Coefficients(Vec<([i64; 3], f64, f64)>),
    /// Seeded zero-mean band-limited field with the given grid sup-norm.
    Random {
        k_max: i64,
        decay: f64,
        seed: u64,
        sup: f64,
    },
}

impl FieldPreset {
    pub fn sample<T: Real>(&self, grid: GridSpec) -> Result<Field<T>> {
        match self {
            FieldPreset::Zero => Ok(Field::zeros(grid)),
            FieldPreset::Mode {
                wavevector,
                amplitude,
                phase,
            } => {
                let n = wavevector.map(|w| T::lit(w as f64));
                let (a, p) = (T::lit(*amplitude), T::lit(*phase));
                Field::from_fn(grid, move |x| a * (n[0] * x[0] + n[1] * x[1] + n[2] * x[2] + p).cos())
            }
            FieldPreset::Bump { width, amplitude } => {
                let bump = crate::source::SpatialPreset::Bump { width: *width }.sample::<T>(grid)?;
                Ok(mean_decompose(&bump).oscillatory.scaled(T::lit(*amplitude)))
            }
            FieldPreset::Coefficients(list) => {
                let mut s = Spectrum::zeros(grid);
                for &(n, re, im) in list {
                    s.set_real_pair(n, Complex::new(T::lit(re), T::lit(im)))?;
                }
                SpectralPlan::new(grid).inverse(&s)
            }
            FieldPreset::Random { k_max, decay, seed, sup } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                BandLimited::new(*k_max, *decay)
                    .zero_mean()
                    .field_with_sup(grid, T::lit(*sup), &mut rng)
            }
        }
    }
}

/// Initial data, optionally rescaled jointly so that `E_m(0)` hits a target.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: FieldPreset,
    pub u1: FieldPreset,
    pub energy: Option<f64>,
}

/// How the source amplitude `ε = sup_t ‖a‖_{H^m}` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    /// Use the payload as given.
    Raw,
    Absolute(f64),
    /// A fraction of the admissible budget `min(ε₁, ε₂)`.
    BudgetFraction(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub name: String,
    pub grid: GridSpec,
    pub params: ModelParams<T>,
    pub source: SourcePayload<T>,
    pub amplitude: Amplitude,
    pub initial: InitialData,
    pub dt: T,
    pub t_end: T,
    pub sample_every: usize,
    pub dealias: bool,
    /// `None` disables the bootstrap machinery.
    pub bootstrap: Option<BootstrapInputs<T>>,
    pub asymptotic_tol: f64,
    pub mean_mode_tol: f64,
}

/// Everything computed from a scenario before the time integration.
#[derive(Debug, Clone)]
pub struct Resolved<T> {
    pub u0: Field<T>,
    pub u1: Field<T>,
    pub e_m0: T,
    pub bootstrap: Option<BootstrapParams<T>>,
    /// Why the bootstrap parameters are absent, when they are.
    pub bootstrap_note: Option<String>,
    /// Source amplitude actually imposed, if any.
    pub amplitude: Option<T>,
    pub source: Source<T>,
    pub config: SolverConfig<T>,
}

#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub resolved: Resolved<T>,
    pub trajectory: Trajectory<T>,
    pub report: VerificationReport<T>,
}

impl<T: Real> Scenario<T> {
    /// `Ω = ½`, `K = 2/3`, fluid source at half the budget, `u₀ = 0`,
    /// `u₁ ∝ sin x₁` with `E₃(0) = 0.05`, on `16³` up to `t = 100`.
    pub fn flagship() -> Result<Self> {
        let grid = GridSpec::new(16)?;
        let params = ModelParams::from_equation_of_state(T::lit(2.0 / 3.0), T::lit(0.5), 3)?;
        Ok(Self {
            name: "flagship".into(),
            grid,
            params,
            source: SourcePayload::Fluid {
                potential: FluidPotential::preset(grid, T::one(), T::lit(0.3), T::lit(0.2))?,
            },
            amplitude: Amplitude::BudgetFraction(0.5),
            initial: InitialData {
                u0: FieldPreset::Zero,
                u1: FieldPreset::Mode {
                    wavevector: [1, 0, 0],
                    amplitude: 1.0,
                    phase: -std::f64::consts::FRAC_PI_2,
                },
                energy: Some(0.05),
            },
            dt: T::lit(0.02),
            t_end: T::lit(100.0),
            sample_every: 5,
            dealias: true,
            bootstrap: Some(BootstrapInputs::default()),
            asymptotic_tol: 1e-6,
            mean_mode_tol: 1e-3,
        })
    }

    /// Zero data and zero source with the flagship model.
    pub fn zero() -> Result<Self> {
        Ok(Self {
            name: "zero".into(),
            source: SourcePayload::Zero,
            amplitude: Amplitude::Raw,
            initial: InitialData {
                u0: FieldPreset::Zero,
                u1: FieldPreset::Zero,
                energy: None,
            },
            t_end: T::lit(40.0),
            dt: T::lit(0.05),
            sample_every: 4,
            ..Self::flagship()?
        })
    }

    pub fn initial_fields(&self) -> Result<(Field<T>, Field<T>)> {
        let u0 = self.initial.u0.sample::<T>(self.grid)?;
        let u1 = self.initial.u1.sample::<T>(self.grid)?;
        let Some(target) = self.initial.energy else {
            return Ok((u0, u1));
        };
        let target = T::lit(target);
        if !(target >= T::zero()) {
            return Err(Error::Parameter(format!("initial energy must be >= 0, got {target}")));
        }
        let e = modified_energy(&u0, &u1, self.params.omega, self.params.m)?.sqrt();
        if e == T::zero() {
            if target == T::zero() {
                return Ok((u0, u1));
            }
            return Err(Error::Parameter(
                "initial data vanish and cannot be scaled to a positive energy".into(),
            ));
        }
        let c = target / e;
        Ok((u0.scaled(c), u1.scaled(c)))
    }

    /// Build the initial data, the bootstrap parameters and the source.
    pub fn resolve(&self, constants: &Constants) -> Result<Resolved<T>> {
        self.params.validate()?;
        let config = SolverConfig::new(self.grid, self.dt, self.t_end, self.sample_every)?.with_dealias(self.dealias);
        config.steps()?;
        let (u0, u1) = self.initial_fields()?;
        let e_m0 = modified_energy(&u0, &u1, self.params.omega, self.params.m)?.sqrt();

        let (bootstrap, bootstrap_note) = match &self.bootstrap {
            None => (None, Some("bootstrap disabled".to_string())),
            Some(inputs) => {
                constants.ensure_matches(self.grid, self.params.m)?;
                let p = &self.params;
                match resolve_bootstrap(inputs, p.omega, p.mu, p.m, e_m0, constants) {
                    Ok(bp) => (Some(bp), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            }
        };

        let amplitude = match self.amplitude {
            Amplitude::Raw => None,
            Amplitude::Absolute(a) => Some(T::lit(a)),
            Amplitude::BudgetFraction(f) => {
                let bp = bootstrap.as_ref().ok_or_else(|| {
                    Error::Parameter(format!(
                        "a budget-relative amplitude needs bootstrap parameters ({})",
                        bootstrap_note.as_deref().unwrap_or("unavailable")
                    ))
                })?;
                Some(T::lit(f) * bp.budget())
            }
        };
        let source = SourceSpec::new(self.source.clone(), amplitude).realize(self.grid, &self.params)?;
        Ok(Resolved {
            u0,
            u1,
            e_m0,
            bootstrap,
            bootstrap_note,
            amplitude,
            source,
            config,
        })
    }

    /// The scenario with every automatic choice replaced by its value.
    pub fn echo(&self, resolved: &Resolved<T>) -> Self {
        let mut out = self.clone();
        if let Some(a) = resolved.amplitude {
            out.amplitude = Amplitude::Absolute(a.to_f64_lossy());
        }
        if let (Some(_), Some(bp)) = (&self.bootstrap, &resolved.bootstrap) {
            out.bootstrap = Some(BootstrapInputs {
                t1: Some(bp.t1),
                eps_prime: Some(bp.eps_prime),
                delta: Some(bp.delta),
                delta_prime: Some(bp.delta_prime),
            });
        }
        out
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            scenario: self.name.clone(),
            asymptotic_tol: self.asymptotic_tol,
            mean_mode_tol: self.mean_mode_tol,
        }
    }

    /// Resolve, integrate and verify.
    pub fn run(&self, constants: &Constants) -> Result<Outcome<T>> {
        let resolved = self.resolve(constants)?;
        let trajectory = simulate(
            &resolved.u0,
            &resolved.u1,
            &self.params,
            &resolved.source,
            &resolved.config,
        )?;
        let mut report = run_all(&trajectory, resolved.bootstrap.as_ref(), constants, &self.verify_options());
        if let Some(note) = &resolved.bootstrap_note {
            for r in report.results.iter_mut() {
                if let Some(reason) = r.skip_reason.as_mut().filter(|s| s.starts_with("no bootstrap parameters")) {
                    *reason = format!("no bootstrap parameters: {note}");
                }
            }
        }
        Ok(Outcome {
            resolved,
            trajectory,
            report,
        })
    }
}
