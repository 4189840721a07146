use dampwave::calibrate::Constants;
use dampwave::estimates::BootstrapInputs;
use dampwave::scenario::{Amplitude, FieldPreset, InitialData, Outcome, Scenario};
use dampwave::source::{FluidPotential, ModelParams, SourcePayload, SpatialPreset, TimeProfile};
use dampwave::torus::GridSpec;
use dampwave::verify::*;
use proptest::prelude::*;

fn g8() -> GridSpec {
    GridSpec::new(8).unwrap()
}

fn constants() -> Constants {
    Constants::default_for(g8(), 3).unwrap()
}

/// The flagship setup on an 8³ grid with a shorter horizon.
fn small_flagship(t_end: f64) -> Scenario<f64> {
    let mut s = Scenario::<f64>::flagship().unwrap();
    s.grid = g8();
    s.source = SourcePayload::Fluid {
        potential: FluidPotential::preset(s.grid, 1.0, 0.3, 0.2).unwrap(),
    };
    s.t_end = t_end;
    s
}

fn linear(mode: [i64; 3], t_end: f64) -> Scenario<f64> {
    Scenario {
        name: "linear".into(),
        params: ModelParams::new(0.5, 0.5, 1.0, 3).unwrap(),
        source: SourcePayload::Zero,
        amplitude: Amplitude::Raw,
        initial: InitialData {
            u0: FieldPreset::Mode {
                wavevector: mode,
                amplitude: 0.01,
                phase: 0.0,
            },
            u1: FieldPreset::Zero,
            energy: None,
        },
        dt: 0.05,
        t_end,
        sample_every: 2,
        ..small_flagship(t_end)
    }
}

fn run(s: &Scenario<f64>) -> Outcome<f64> {
    s.run(&constants()).unwrap()
}

fn get<'a>(o: &'a Outcome<f64>, id: &str) -> &'a CheckResult {
    o.report.result(id).unwrap_or_else(|| panic!("no check {id}"))
}

#[test]
fn differential_single_mode_has_positive_margin() {
    let o = run(&linear([1, 0, 0], 20.0));
    let r = get(&o, "energy.differential");
    assert!(r.passed && r.worst_margin > 0.0, "{r:?}");
    assert!(get(&o, "energy.integral").passed);
}

#[test]
fn zero_scenario_passes_with_zero_margins() {
    let s = Scenario::<f64>::zero().unwrap();
    let mut s = Scenario { grid: g8(), ..s };
    s.t_end = 40.0;
    let o = run(&s);
    assert!(o.report.all_passed(), "{}", o.report.to_text());
    for id in ["energy.differential", "energy.integral", "mean_mode", "bootstrap"] {
        let r = get(&o, id);
        assert!(r.passed, "{r:?}");
    }
    assert_eq!(get(&o, "energy.differential").worst_margin, 0.0);
    assert_eq!(o.report.c0_estimate, Some(0.0));
    assert_eq!(o.report.t_max_empirical, None);
}

#[test]
fn corrupted_trajectory_fails_both_energy_checks() {
    let s = small_flagship(20.0);
    let c = constants();
    let o = s.run(&c).unwrap();
    assert!(get(&o, "energy.differential").passed);
    assert!(get(&o, "energy.integral").passed);
    let bad = corrupt_energy(&o.trajectory);
    let rep = run_all(&bad, o.resolved.bootstrap.as_ref(), &c, &s.verify_options());
    for id in ["energy.differential", "energy.integral"] {
        let r = rep.result(id).unwrap();
        assert!(!r.passed && r.worst_margin < -r.tolerance_used, "{r:?}");
    }
}

#[test]
fn bootstrap_gate_skips_large_displacement() {
    // u₀ = c, u₁ = −(Ω/2)c gives E_m(0) = Ω|c|(2π)^{3/2}/(2√2) < ¼‖u₀‖
    let mut s = linear([0, 0, 0], 4.0);
    s.initial.u0 = FieldPreset::Mode {
        wavevector: [0, 0, 0],
        amplitude: 0.01,
        phase: 0.0,
    };
    s.initial.u1 = FieldPreset::Mode {
        wavevector: [0, 0, 0],
        amplitude: -0.0025,
        phase: 0.0,
    };
    let o = run(&s);
    let r = get(&o, "bootstrap");
    assert!(r.is_skipped(), "{r:?}");
    assert!(r.skip_reason.as_ref().unwrap().contains("1/4"));
}

#[test]
fn zero_source_small_data_never_violates_bootstrap() {
    let o = run(&linear([1, 1, 0], 20.0));
    assert!(get(&o, "bootstrap").passed);
    assert_eq!(o.report.t_max_empirical, None);
    assert!(get(&o, "improved_estimates").passed);
}

#[test]
fn source_far_over_budget_violates_bootstrap() {
    let mut s = small_flagship(10.0);
    s.amplitude = Amplitude::BudgetFraction(50.0);
    let o = run(&s);
    let r = get(&o, "bootstrap");
    assert!(!r.passed, "{r:?}");
    let t = o.report.t_max_empirical.expect("violation time");
    assert!(t > 0.0 && t < 10.0);
    assert!(get(&o, "improved_estimates").skip_reason.as_ref().unwrap().contains("budget exceeded"));
}

#[test]
fn half_budget_fluid_passes_improved_estimates() {
    let o = run(&small_flagship(40.0));
    assert!(get(&o, "improved_estimates").passed);
    assert!(o.report.all_passed(), "{}", o.report.to_text());
}

#[test]
fn eps_prime_above_h_skips_with_reason() {
    let mut s = linear([1, 0, 0], 4.0);
    s.bootstrap = Some(BootstrapInputs {
        eps_prime: Some(0.9),
        ..Default::default()
    });
    let o = run(&s);
    let reason = get(&o, "improved_estimates").skip_reason.clone().unwrap();
    assert!(reason.contains("is not below h(T1)"), "{reason}");
}

/// Zero data, `μ = 0`, uniform `a = A`: `ū'' + 2Ωū' = A e^{−κt}` so
/// `ū = A/(2Ω−κ) [(1−e^{−κt})/κ − (1−e^{−2Ωt})/(2Ω)]`.
fn manufactured_mean(omega: f64, kappa: f64, a: f64, t: f64) -> f64 {
    a / (2.0 * omega - kappa) * ((1.0 - (-kappa * t).exp()) / kappa - (1.0 - (-2.0 * omega * t).exp()) / (2.0 * omega))
}

fn uniform_source(kappa: f64, t_end: f64, dt: f64) -> Scenario<f64> {
    Scenario {
        params: ModelParams::new(0.5, kappa, 0.0, 3).unwrap(),
        source: SourcePayload::Preset {
            spatial: SpatialPreset::Uniform,
            time: TimeProfile::Constant,
        },
        amplitude: Amplitude::Raw,
        initial: InitialData {
            u0: FieldPreset::Zero,
            u1: FieldPreset::Zero,
            energy: None,
        },
        bootstrap: None,
        dt,
        t_end,
        sample_every: 1,
        ..linear([0, 0, 0], t_end)
    }
}

#[test]
fn mean_mode_matches_manufactured_solution() {
    let (omega, kappa) = (0.5, 0.05);
    let o = run(&uniform_source(kappa, 10.0, 0.02));
    assert!(get(&o, "mean_mode").passed);
    let scale = manufactured_mean(omega, kappa, 1.0, 10.0);
    for s in &o.trajectory.samples {
        let exact = manufactured_mean(omega, kappa, 1.0, s.t);
        assert!((s.u_mean - exact).abs() < 1e-5 * scale, "t = {}", s.t);
    }
}

#[test]
fn mean_mode_discrepancy_is_second_order() {
    let d: Vec<f64> = [0.04, 0.02]
        .iter()
        .map(|&dt| {
            let s = uniform_source(0.3, 5.0, dt);
            let r = s.resolve(&constants()).unwrap();
            let tr = dampwave::solver::simulate(&r.u0, &r.u1, &s.params, &r.source, &r.config).unwrap();
            mean_mode_discrepancy(&tr).unwrap()
        })
        .collect();
    let ratio = d[0] / d[1];
    assert!((3.5..=4.5).contains(&ratio), "{d:?}");
}

#[test]
fn zero_source_limit_constant() {
    let (m0, m1, omega) = (0.01, 0.004, 0.5);
    let mut s = linear([1, 0, 1], 30.0 / omega);
    s.initial.u0 = FieldPreset::Coefficients(vec![([0, 0, 0], m0, 0.0), ([1, 0, 1], 0.002, 0.001)]);
    s.initial.u1 = FieldPreset::Coefficients(vec![([0, 0, 0], m1, 0.0), ([0, 2, 0], -0.001, 0.0)]);
    let o = run(&s);
    let c0 = o.report.c0_estimate.unwrap();
    assert!((c0 - (m0 + m1 / (2.0 * omega))).abs() < 1e-6, "{c0}");
    assert!(get(&o, "asymptotics.ut_decay").passed);
    assert!(get(&o, "asymptotics.flattening").passed);
    // nonzero means take the mean-mode comparison out of scope
    assert!(get(&o, "mean_mode").is_skipped());
}

#[test]
fn decaying_source_limit_constant() {
    let (omega, kappa) = (0.5, 0.5);
    let t_end = 60.0;
    let o = run(&uniform_source(kappa, t_end, 0.02));
    let c0 = o.report.c0_estimate.unwrap();
    // the recorded limit agrees with the quadrature of the mean-mode
    // equation, and both with the exact integral up to O(dt²)
    let reference = dampwave::solver::mean_mode_reference(&o.trajectory).unwrap();
    let quad = reference.last().unwrap().1;
    assert!((c0 - quad).abs() < 1e-6 * quad, "{c0} vs {quad}");
    let exact = manufactured_mean(omega, kappa, 1.0, t_end);
    assert!((c0 - exact).abs() < 1e-4 * exact, "{c0} vs {exact}");
}

#[test]
fn short_runs_skip_asymptotics() {
    let o = run(&linear([1, 0, 0], 10.0));
    let r = get(&o, "asymptotics.ut_decay");
    assert!(r.skip_reason.as_ref().unwrap().contains("shorter than 20/omega"));
}

#[test]
fn report_is_deterministic_and_complete() {
    let s = small_flagship(10.0);
    let a = run(&s).report;
    let b = run(&s).report;
    assert_eq!(a.to_text(), b.to_text());
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.results.len(), 17);
    for r in &a.results {
        assert_eq!(r.passed, r.worst_margin >= -r.tolerance_used, "{r:?}");
        assert!(r.passed || r.skip_reason.is_some() || r.worst_margin < -r.tolerance_used);
    }
}

type Mutation = fn(&mut dampwave::EnergySample64);

/// A valid run, then one field pushed past each inequality.
#[test]
fn every_trajectory_check_can_fail() {
    let s = small_flagship(40.0);
    let c = constants();
    let o = s.run(&c).unwrap();
    let bp = o.resolved.bootstrap.as_ref();
    let cases: [(&str, Mutation); 12] = [
        ("bootstrap", |x| x.u_hm *= 100.0),
        ("bootstrap.step1", |x| x.u_hm += 1.0),
        ("energy.differential", |x| x.e_m_sq *= 4.0),
        ("energy.integral", |x| x.e_m_sq *= 4.0),
        ("energy.l2_control", |x| x.u_hm *= 1e3),
        ("energy.damped_combination", |x| x.damped_hm *= 10.0),
        ("improved_estimates", |x| x.e_m_sq = 1.0),
        ("mean_mode", |x| x.u_mean += 1e-3),
        ("mean_mode.bound", |x| x.u_mean += 1.0),
        ("asymptotics.standard_energy_bound", |x| x.e_std_sq += 1.0),
        ("asymptotics.ut_decay", |x| x.ut_hm += 1.0),
        ("source.norm_bound", |x| x.f_hm *= 10.0),
    ];
    for (id, mutate) in cases {
        let mut bad = o.trajectory.clone();
        let n = bad.samples.len();
        // late samples, except the first-interval claim which lives at the start
        let idx = if id == "bootstrap.step1" { 1 } else { n - 1 - n / 20 };
        mutate(&mut bad.samples[idx]);
        let rep = run_all(&bad, bp, &c, &s.verify_options());
        let r = rep.result(id).unwrap();
        assert!(!r.passed && !r.is_skipped(), "{id}: {r:?}");
    }
    let mut bad = o.trajectory.clone();
    let last = bad.samples.len() - 1;
    bad.samples[last].u_osc_hm = 1.0;
    let r = check_asymptotics(&bad, 1e-6).0;
    assert!(!r[1].passed && r[1].check_id == "asymptotics.flattening");
}

#[test]
fn final_state_checks_fail_with_undersized_constants() {
    let s = small_flagship(4.0);
    let o = run(&s);
    let state = &o.trajectory.final_state;
    let tiny = Constants::fixed(8, 3, 1e-6, 1e-6, vec![1e-6; 3]);
    assert!(!check_algebra(state, 3, &tiny).unwrap().passed);
    assert!(!check_sobolev(state, 3, &tiny).unwrap().passed);
    assert!(check_wirtinger(state).unwrap().passed);
    // M_μ is analytic, so the composition bound survives even negligible
    // Moser constants
    let r = check_fractional(state, &s.params, o.resolved.bootstrap.as_ref(), &tiny).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn wirtinger_is_sharp_on_lowest_mode() {
    let s = linear([1, 0, 0], 0.2);
    let o = run(&Scenario { sample_every: 1, dt: 0.1, ..s });
    let mut state = o.trajectory.final_state.clone();
    state.u = dampwave::torus::Field::from_fn(g8(), |x: [f64; 3]| x[0].sin()).unwrap();
    state.ut = dampwave::torus::Field::zeros(g8());
    let r = check_wirtinger(&state).unwrap();
    assert!(r.passed && r.worst_margin.abs() < 1e-12, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    /// Shrinking data and source together keeps the linear-regime verdicts.
    #[test]
    fn energy_verdicts_are_scale_invariant(lambda in 0.05f64..1.0) {
        let base = Scenario {
            params: ModelParams::new(0.5, 0.5, 1.0, 3).unwrap(),
            source: SourcePayload::Preset {
                spatial: SpatialPreset::Bump { width: 0.8 },
                time: TimeProfile::Constant,
            },
            amplitude: Amplitude::Absolute(1e-3),
            t_end: 6.0,
            ..linear([1, 1, 1], 6.0)
        };
        let mut scaled = base.clone();
        scaled.amplitude = Amplitude::Absolute(1e-3 * lambda);
        scaled.initial.u0 = FieldPreset::Mode { wavevector: [1, 1, 1], amplitude: 0.01 * lambda, phase: 0.0 };
        let (a, b) = (run(&base), run(&scaled));
        for id in ["energy.differential", "energy.integral"] {
            prop_assert_eq!(get(&a, id).passed, get(&b, id).passed);
            prop_assert!(get(&b, id).passed);
        }
    }
}
