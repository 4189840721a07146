//! Pseudo-spectral time integration.
//!
//! The state lives in Fourier space. Each mode is advanced by its exact
//! damped-oscillator propagator; the source is evaluated pointwise on the
//! grid and enters through a two-stage exponential scheme: a predictor with
//! the forcing frozen at the start of the step, then a corrector with the
//! average of the start and predicted-end forcing. The scheme is exact when
//! `F = 0` and second order otherwise.

mod propagator;

use num_complex::Complex;

pub use propagator::{mode_propagator, ModePropagator};

use crate::energy::{EnergyEvaluator, EnergySample};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::source::{ModelParams, Source};
use crate::torus::{Field, GridSpec, SobolevWeights, SpectralPlan, Spectrum};

/// `(u, ∂ₜu)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    pub t: T,
    pub u: Field<T>,
    pub ut: Field<T>,
}

impl<T: Real> SolverState<T> {
    pub fn new(t: T, u: Field<T>, ut: Field<T>) -> Result<Self> {
        u.grid().ensure_same(&ut.grid())?;
        if !(t >= T::zero()) {
            return Err(Error::Parameter(format!("state time must be >= 0, got {t}")));
        }
        Ok(Self { t, u, ut })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub grid: GridSpec,
    pub dt: T,
    pub t_end: T,
    pub sample_every: usize,
    /// Two-thirds truncation of the nonlinear term.
    pub dealias: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(grid: GridSpec, dt: T, t_end: T, sample_every: usize) -> Result<Self> {
        let c = Self {
            grid,
            dt,
            t_end,
            sample_every,
            dealias: true,
        };
        c.steps()?;
        Ok(c)
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    /// Number of steps; `t_end` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > self.dt) || !self.t_end.is_finite() {
            return Err(Error::Parameter(format!(
                "t_end must exceed dt, got t_end = {}, dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Parameter("sample_every must be positive".into()));
        }
        let ratio = (self.t_end / self.dt).to_f64_lossy();
        if ratio > (u32::MAX as f64) {
            return Err(Error::Parameter(format!("t_end/dt = {ratio} steps is too many")));
        }
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 {
            return Err(Error::Parameter(format!(
                "t_end = {} is not a whole multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }

    #[inline]
    pub fn time_of(&self, step: usize) -> T {
        T::lit(step as f64) * self.dt
    }
}

/// Why an integration stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub params: ModelParams<T>,
    pub config: SolverConfig<T>,
    pub samples: Vec<EnergySample<T>>,
    pub breakdown: Option<Breakdown>,
    /// Last state reached, at the final sample time.
    pub final_state: SolverState<T>,
    /// Means of `u₀` and `u₁`.
    pub initial_means: (T, T),
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn completed(&self) -> bool {
        self.breakdown.is_none()
    }
}

/// Spectral state `(û, ∂ₜû)`.
#[derive(Debug, Clone, PartialEq)]
struct SpectralState<T> {
    u: Spectrum<T>,
    ut: Spectrum<T>,
}

/// Precomputed propagators and transforms for one grid, step and model.
#[derive(Debug, Clone)]
pub struct Solver<'a, T: Real> {
    params: ModelParams<T>,
    config: SolverConfig<T>,
    source: &'a Source<T>,
    energy: EnergyEvaluator<T>,
    weights_m1: SobolevWeights<T>,
    props: Vec<ModePropagator<T>>,
    keep: Vec<bool>,
}

impl<'a, T: Real> Solver<'a, T> {
    pub fn new(params: ModelParams<T>, source: &'a Source<T>, config: SolverConfig<T>) -> Result<Self> {
        params.validate()?;
        config.steps()?;
        let grid = config.grid;
        grid.ensure_same(&source.grid())?;
        let energy = EnergyEvaluator::new(SpectralPlan::new(grid), params.m);
        let props = energy
            .weights()
            .n_sq()
            .iter()
            .map(|&k2| mode_propagator(k2, params.omega, config.dt))
            .collect();
        let keep = (0..grid.len())
            .map(|i| !config.dealias || grid.dealias_keeps(grid.wavevector(i)))
            .collect();
        Ok(Self {
            params,
            config,
            source,
            weights_m1: SobolevWeights::new(grid, params.m + 1),
            energy,
            props,
            keep,
        })
    }

    fn plan(&self) -> &SpectralPlan<T> {
        self.energy.plan()
    }

    /// `F̂(t, u)`, truncated when dealiasing is on.
    fn forcing(&self, t: T, u: &Field<T>) -> Result<Spectrum<T>> {
        if self.source.is_zero() {
            return Ok(Spectrum::zeros(self.config.grid));
        }
        let f = self.source.eval(t, u)?;
        let mut s = self.plan().forward(&f)?;
        let zero = Complex::new(T::zero(), T::zero());
        for (c, &k) in s.coeffs_mut().iter_mut().zip(&self.keep) {
            if !k {
                *c = zero;
            }
        }
        Ok(s)
    }

    fn propagate(&self, x: &SpectralState<T>, f: &[Complex<T>]) -> SpectralState<T> {
        let mut out = x.clone();
        for (((u, ut), p), &fk) in out
            .u
            .coeffs_mut()
            .iter_mut()
            .zip(out.ut.coeffs_mut().iter_mut())
            .zip(&self.props)
            .zip(f)
        {
            let (re, re_t) = p.apply(u.re, ut.re, fk.re);
            let (im, im_t) = p.apply(u.im, ut.im, fk.im);
            *u = Complex::new(re, im);
            *ut = Complex::new(re_t, im_t);
        }
        out
    }

    fn physical(&self, s: &Spectrum<T>) -> Field<T> {
        let values = self.plan().inverse_complex(s).into_iter().map(|z| z.re).collect();
        Field::from_values_unchecked(s.grid(), values)
    }

    /// One predictor-corrector step from `t`, given `F̂(t, u)`.
    fn advance(&self, t: T, x: &SpectralState<T>, f0: &Spectrum<T>) -> Result<SpectralState<T>> {
        if self.source.is_zero() {
            return Ok(self.propagate(x, f0.coeffs()));
        }
        let predicted = self.propagate(x, f0.coeffs());
        let u_star = self.physical(&predicted.u);
        let f1 = self.forcing(t + self.config.dt, &u_star)?;
        let half = T::lit(0.5);
        let avg: Vec<Complex<T>> = f0
            .coeffs()
            .iter()
            .zip(f1.coeffs())
            .map(|(a, b)| (a + b).scale(half))
            .collect();
        Ok(self.propagate(x, &avg))
    }

    fn sample(&self, t: T, x: &SpectralState<T>, u: &Field<T>, f: &Spectrum<T>) -> Result<EnergySample<T>> {
        let w = self.energy.weights();
        let vol = T::torus_volume();
        let u_hm_sq = w.norm_sq(&x.u);
        let u_mean = x.u.get([0, 0, 0]).re;
        let a = self.source.profile_at(t);
        let a_hm = if self.source.is_zero() {
            T::zero()
        } else {
            w.norm_sq(&self.plan().forward(&a)?).sqrt()
        };
        let half_omega = self.params.omega * T::lit(0.5);
        let damped = Spectrum::from_coeffs(
            x.u.grid(),
            x.ut.coeffs().iter().zip(x.u.coeffs()).map(|(b, a)| b + a.scale(half_omega)).collect(),
        )?;
        Ok(EnergySample {
            t,
            e_m_sq: self.energy.modified_energy_spectral(&x.u, &x.ut, self.params.omega),
            e_std_sq: self.energy.standard_energy_spectral(&x.u, &x.ut),
            u_hm: u_hm_sq.sqrt(),
            ut_hm: w.norm_sq(&x.ut).sqrt(),
            f_hm: w.norm_sq(f).sqrt(),
            u_mean,
            f_mean: f.get([0, 0, 0]).re,
            u_min: u.min(),
            u_sup: u.values().iter().fold(T::zero(), |m, v| m.max(v.abs())),
            grad_u_hm: w.grad_norm_sq(&x.u).sqrt(),
            u_osc_hm: (u_hm_sq - vol * u_mean * u_mean).max(T::zero()).sqrt(),
            u_hm1: self.weights_m1.norm_sq(&x.u).sqrt(),
            a_hm,
            damped_hm: w.norm_sq(&damped).sqrt(),
        })
    }

    /// Advance a physical state by one step.
    pub fn step(&self, state: &SolverState<T>) -> Result<SolverState<T>> {
        self.config.grid.ensure_same(&state.u.grid())?;
        let x = SpectralState {
            u: self.plan().forward(&state.u)?,
            ut: self.plan().forward(&state.ut)?,
        };
        let f0 = self.forcing(state.t, &state.u)?;
        let next = self.advance(state.t, &x, &f0)?;
        let t = state.t + self.config.dt;
        let u = self.physical(&next.u);
        let ut = self.physical(&next.ut);
        if !finite(&u) || !finite(&ut) {
            return Err(Error::NanDetected {
                step: 1,
                t: t.to_f64_lossy(),
            });
        }
        Ok(SolverState { t, u, ut })
    }

    /// Integrate from `(u₀, u₁)` at `t = 0` to `t_end`.
    pub fn run(&self, u0: &Field<T>, u1: &Field<T>) -> Result<Trajectory<T>> {
        let grid = self.config.grid;
        grid.ensure_same(&u0.grid())?;
        grid.ensure_same(&u1.grid())?;
        let steps = self.config.steps()?;
        let mut x = SpectralState {
            u: self.plan().forward(u0)?,
            ut: self.plan().forward(u1)?,
        };
        let initial_means = (x.u.get([0, 0, 0]).re, x.ut.get([0, 0, 0]).re);
        let mut samples = Vec::with_capacity(steps / self.config.sample_every + 2);
        let mut breakdown = None;
        let mut u = u0.clone();
        let mut last_sampled = (T::zero(), x.clone());
        let mut n = 0;
        loop {
            let t = self.config.time_of(n);
            let f = match self.forcing(t, &u) {
                Ok(f) => f,
                Err(e) => {
                    breakdown = Some(Breakdown {
                        t: t.to_f64_lossy(),
                        reason: e.to_string(),
                    });
                    break;
                }
            };
            if n % self.config.sample_every == 0 || n == steps {
                samples.push(self.sample(t, &x, &u, &f)?);
                last_sampled = (t, x.clone());
            }
            if n == steps {
                break;
            }
            match self.advance(t, &x, &f) {
                Ok(next) => x = next,
                Err(e) => {
                    breakdown = Some(Breakdown {
                        t: (t + self.config.dt).to_f64_lossy(),
                        reason: e.to_string(),
                    });
                    break;
                }
            }
            n += 1;
            u = self.physical(&x.u);
            if !finite(&u) || x.ut.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                let t = self.config.time_of(n);
                breakdown = Some(Breakdown {
                    t: t.to_f64_lossy(),
                    reason: Error::NanDetected {
                        step: n,
                        t: t.to_f64_lossy(),
                    }
                    .to_string(),
                });
                break;
            }
        }
        // the reported final state is the last sampled one
        let (t_final, x_final) = last_sampled;
        Ok(Trajectory {
            params: self.params,
            config: self.config,
            samples,
            breakdown,
            final_state: SolverState {
                t: t_final,
                u: self.physical(&x_final.u),
                ut: self.physical(&x_final.ut),
            },
            initial_means,
        })
    }
}

fn finite<T: Real>(f: &Field<T>) -> bool {
    f.values().iter().all(|v| v.is_finite())
}

/// Advance `state` by one step of `config.dt`.
pub fn step<T: Real>(
    state: &SolverState<T>,
    params: &ModelParams<T>,
    source: &Source<T>,
    config: &SolverConfig<T>,
) -> Result<SolverState<T>> {
    Solver::new(*params, source, *config)?.step(state)
}

/// Integrate from `(u₀, u₁)`; breakdown ends the run early and is recorded
/// on the returned trajectory.
pub fn simulate<T: Real>(
    u0: &Field<T>,
    u1: &Field<T>,
    params: &ModelParams<T>,
    source: &Source<T>,
    config: &SolverConfig<T>,
) -> Result<Trajectory<T>> {
    Solver::new(*params, source, *config)?.run(u0, u1)
}

/// Mean of the solution predicted from the recorded source means,
/// `ū(t) = (1/2Ω) ∫₀ᵗ (1 − e^{−2Ω(t−τ)}) F̄(τ) dτ`, by trapezoid rule.
///
/// Requires zero-mean initial data.
pub fn mean_mode_reference<T: Real>(trajectory: &Trajectory<T>) -> Result<Vec<(T, T)>> {
    let (m0, m1) = trajectory.initial_means;
    let tol = T::lit(1e-12);
    if m0.abs() > tol || m1.abs() > tol {
        return Err(Error::Parameter(format!(
            "the mean-mode reference assumes zero-mean initial data, got means {m0} and {m1}"
        )));
    }
    let two_omega = trajectory.params.omega * T::lit(2.0);
    let s = &trajectory.samples;
    let half = T::lit(0.5);
    Ok(s
        .iter()
        .enumerate()
        .map(|(j, sj)| {
            let kernel = |tau: T| -(-two_omega * (sj.t - tau)).exp_m1();
            let integral: T = s[..=j]
                .windows(2)
                .map(|w| half * (w[1].t - w[0].t) * (kernel(w[0].t) * w[0].f_mean + kernel(w[1].t) * w[1].f_mean))
                .sum();
            (sj.t, integral / two_omega)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{SourcePayload, SourceSpec, SpatialPreset, TimeProfile};

    fn g8() -> GridSpec {
        GridSpec::new(8).unwrap()
    }

    fn params() -> ModelParams<f64> {
        ModelParams::new(0.5, 0.5, 0.5, 3).unwrap()
    }

    fn zero_source() -> Source<f64> {
        SourceSpec::zero().realize(g8(), &params()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(g8(), 0.1, 1.0, 1).is_ok());
        assert!(SolverConfig::new(g8(), 0.0, 1.0, 1).is_err());
        assert!(SolverConfig::new(g8(), 0.1, 0.05, 1).is_err());
        assert!(SolverConfig::new(g8(), 0.3, 1.0, 1).is_err());
        assert!(SolverConfig::new(g8(), 0.1, 1.0, 0).is_err());
        assert_eq!(SolverConfig::new(g8(), 0.02, 100.0, 5).unwrap().steps().unwrap(), 5000);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = g8();
        let cfg = SolverConfig::new(g, 0.1, 2.0, 3).unwrap();
        let src = zero_source();
        let tr = simulate(&Field::zeros(g), &Field::zeros(g), &params(), &src, &cfg).unwrap();
        assert!(tr.completed());
        let times = tr.times();
        assert_eq!(times.first(), Some(&0.0));
        assert!((times.last().unwrap() - 2.0).abs() < 1e-12);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        for s in &tr.samples {
            assert_eq!(s.e_m_sq, 0.0);
            assert_eq!(s.u_hm, 0.0);
        }
    }

    #[test]
    fn constant_displacement_is_stationary() {
        let g = g8();
        let cfg = SolverConfig::new(g, 0.1, 1.0, 1).unwrap();
        let src = zero_source();
        let state = SolverState::new(0.0, Field::constant(g, 0.3), Field::zeros(g)).unwrap();
        let next = step(&state, &params(), &src, &cfg).unwrap();
        assert!(next.u.values().iter().all(|v| (v - 0.3).abs() < 1e-15));
        assert!(next.ut.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn single_mode_matches_closed_form() {
        let g = g8();
        let c = 0.01;
        let u0 = Field::from_fn(g, |x: [f64; 3]| c * x[0].sin()).unwrap();
        let cfg = SolverConfig::new(g, 0.1, 5.0, 10).unwrap();
        let src = zero_source();
        let tr = simulate(&u0, &Field::zeros(g), &params(), &src, &cfg).unwrap();
        let t = 5.0f64;
        let w = 3.0f64.sqrt() / 2.0;
        let amp = c * (-0.5 * t).exp() * ((w * t).cos() + 0.5 / w * (w * t).sin());
        let expect = Field::from_fn(g, |x: [f64; 3]| amp * x[0].sin()).unwrap();
        for (a, b) in tr.final_state.u.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_velocity_mean_closed_form() {
        let g = g8();
        let c = 0.2;
        let cfg = SolverConfig::new(g, 0.05, 4.0, 10).unwrap();
        let src = zero_source();
        let tr = simulate(&Field::zeros(g), &Field::constant(g, c), &params(), &src, &cfg).unwrap();
        let omega = 0.5;
        for s in &tr.samples {
            let expect = c / (2.0 * omega) * (1.0 - (-2.0 * omega * s.t).exp());
            assert!((s.u_mean - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_energy_decays() {
        let g = g8();
        let u0 = Field::from_fn(g, |x: [f64; 3]| 0.01 * (x[0] + 2.0 * x[2]).cos()).unwrap();
        let u1 = Field::from_fn(g, |x: [f64; 3]| 0.02 * x[1].sin()).unwrap();
        let cfg = SolverConfig::new(g, 0.1, 10.0, 1).unwrap();
        let src = zero_source();
        let tr = simulate(&u0, &u1, &params(), &src, &cfg).unwrap();
        let e: Vec<f64> = tr.samples.iter().map(|s| s.e_m_sq).collect();
        assert!(e.last().unwrap() < &e[0]);
        // the modified energy is nonincreasing for the free damped equation
        assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    fn forced_source(mu: f64) -> (ModelParams<f64>, Source<f64>) {
        let p = ModelParams::new(0.5, 0.5, mu, 3).unwrap();
        let src = SourceSpec::new(
            SourcePayload::Preset {
                spatial: SpatialPreset::Bump { width: 1.0 },
                time: TimeProfile::Cosine { frequency: 1.3 },
            },
            Some(0.05),
        )
        .realize(g8(), &p)
        .unwrap();
        (p, src)
    }

    #[test]
    fn second_order_self_convergence() {
        let g = g8();
        let (p, src) = forced_source(0.5);
        let u1 = Field::from_fn(g, |x: [f64; 3]| 0.05 * x[0].sin()).unwrap();
        let run = |dt: f64| {
            let cfg = SolverConfig::new(g, dt, 2.0, 1000).unwrap();
            simulate(&Field::zeros(g), &u1, &p, &src, &cfg).unwrap().final_state.u
        };
        let reference = run(0.0125);
        let err = |f: &Field<f64>| {
            f.values()
                .iter()
                .zip(reference.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(&run(0.2)), err(&run(0.1)));
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn real_solutions_stay_real() {
        let g = g8();
        let (p, src) = forced_source(0.5);
        let u1 = Field::from_fn(g, |x: [f64; 3]| 0.05 * (x[0] - x[1]).sin()).unwrap();
        let cfg = SolverConfig::new(g, 0.05, 3.0, 20).unwrap();
        let solver = Solver::new(p, &src, cfg).unwrap();
        let mut x = SpectralState {
            u: solver.plan().forward(&Field::zeros(g)).unwrap(),
            ut: solver.plan().forward(&u1).unwrap(),
        };
        for n in 0..60 {
            let t = cfg.time_of(n);
            let u = solver.physical(&x.u);
            let f = solver.forcing(t, &u).unwrap();
            x = solver.advance(t, &x, &f).unwrap();
        }
        assert!(x.u.conjugate_symmetry_defect() < 1e-12);
        assert!(x.ut.conjugate_symmetry_defect() < 1e-12);
    }

    #[test]
    fn breakdown_is_recorded() {
        let g = g8();
        let p = ModelParams::new(0.5, 0.5, 0.5, 3).unwrap();
        let src = SourceSpec::new(
            SourcePayload::Preset {
                spatial: SpatialPreset::Uniform,
                time: TimeProfile::Constant,
            },
            None,
        )
        .realize(g, &p)
        .unwrap();
        // a strong downward kick drives 1 + u through zero
        let u1 = Field::from_fn(g, |x: [f64; 3]| -4.0 * (1.0 + x[0].cos())).unwrap();
        let cfg = SolverConfig::new(g, 0.05, 5.0, 1).unwrap();
        let tr = simulate(&Field::zeros(g), &u1, &p, &src, &cfg).unwrap();
        let b = tr.breakdown.clone().expect("breakdown");
        assert!(b.t > 0.0 && b.t < 5.0);
        assert!(b.reason.contains("breakdown"));
        assert!(tr.final_state.u.min() > -1.0);
        assert_eq!(tr.samples.last().unwrap().t, tr.final_state.t);
    }

    #[test]
    fn mean_reference_closed_form_for_constant_forcing() {
        let g = g8();
        let p = ModelParams::<f64>::new(0.5, 0.5, 0.0, 3).unwrap();
        let src = SourceSpec::new(
            SourcePayload::Preset {
                spatial: SpatialPreset::Uniform,
                time: TimeProfile::Constant,
            },
            None,
        )
        .realize(g, &p)
        .unwrap();
        // μ = 0 makes F̄(t) = e^{−κt}; the reference tracks the solver mean
        let cfg = SolverConfig::new(g, 0.01, 4.0, 1).unwrap();
        let mut tr = simulate(&Field::zeros(g), &Field::zeros(g), &p, &src, &cfg).unwrap();
        let r = mean_mode_reference(&tr).unwrap();
        for ((t, reference), s) in r.iter().zip(&tr.samples) {
            assert!((*reference - s.u_mean).abs() < 1e-5, "t = {t}");
        }
        let f0 = 0.7;
        for s in &mut tr.samples {
            s.f_mean = f0;
        }
        let omega = p.omega;
        for (t, reference) in mean_mode_reference(&tr).unwrap() {
            let exact = f0 / (2.0 * omega) * (t - (1.0 - (-2.0 * omega * t).exp()) / (2.0 * omega));
            assert!((reference - exact).abs() < 1e-5 * (1.0 + exact), "t = {t}");
        }
    }

    #[test]
    fn mean_reference_rejects_nonzero_means() {
        let g = g8();
        let cfg = SolverConfig::new(g, 0.1, 1.0, 1).unwrap();
        let src = zero_source();
        let tr = simulate(&Field::constant(g, 0.1), &Field::zeros(g), &params(), &src, &cfg).unwrap();
        assert!(mean_mode_reference(&tr).is_err());
        let tr = simulate(&Field::zeros(g), &Field::zeros(g), &params(), &src, &cfg).unwrap();
        assert!(mean_mode_reference(&tr).unwrap().iter().all(|&(_, v)| v == 0.0));
    }
}
