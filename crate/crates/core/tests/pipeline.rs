use focal_core::analysis::{
    audit_practical_steps, compare_spectra, fit_learning_rate, FitWindow, SignConvention,
};
use focal_core::focal::{run, run_focal, Switchover};
use focal_core::landscape::{Ellipse, EllipseSpec, Sphere};
use focal_core::pulse::{PulseSpec, Shg};
use focal_core::{
    FocalConfig, Landscape, Phase, Regime, RunSettings, StepSizeControl, StrategyConfig, WrapPolicy,
};

fn ellipse(n: usize) -> Ellipse {
    Ellipse::new(EllipseSpec {
        n,
        condition: 1e4,
        noise: 0.0,
    })
    .unwrap()
}

fn focal_cfg() -> FocalConfig {
    FocalConfig::new(0.075, 0.1, 0.08).with_switchover(Switchover::Immediate)
}

#[test]
fn ellipse_spectrum_is_recovered_at_n10() {
    let f = ellipse(10);
    let strategy = StrategyConfig::with_population(10, 20, 10).unwrap();
    let out = run_focal(&f, &strategy, focal_cfg(), 6_000, 11, vec![0.0; 10]).unwrap();
    let reference = f.coefficients().to_vec();
    let cmp =
        compare_spectra(&out.estimate.spectrum, &reference, SignConvention::Minimize).unwrap();
    assert!(cmp.log_rms_error < 0.6, "log-RMS {}", cmp.log_rms_error);
    assert_eq!(audit_practical_steps(&out.trace).violations, 0);
    let fit = fit_learning_rate(&out.trace, FitWindow::FocalPhase).unwrap();
    assert!(fit.slope > 0.0);
}

#[test]
fn identical_seeds_give_identical_traces() {
    let f = ellipse(6);
    let strategy = StrategyConfig::default_for(6);
    let a = run_focal(&f, &strategy, focal_cfg(), 2_000, 5, vec![0.3; 6]).unwrap();
    let b = run_focal(&f, &strategy, focal_cfg(), 2_000, 5, vec![0.3; 6]).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.estimate.spectrum, b.estimate.spectrum);
    let c = run_focal(&f, &strategy, focal_cfg(), 2_000, 6, vec![0.3; 6]).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn budget_is_spent_in_whole_generations() {
    let f = Sphere::new(4, 0.0).unwrap();
    let strategy = StrategyConfig::default_for(4);
    let lambda = strategy.lambda as u64;
    let out = run_focal(&f, &strategy, focal_cfg(), 1_003, 1, vec![1.0; 4]).unwrap();
    assert!(out.state.evaluations <= 1_003);
    assert_eq!(out.state.evaluations % lambda, 0);
    assert!(1_003 - out.state.evaluations < lambda);
    assert_eq!(
        out.trace.rows.last().unwrap().evaluations,
        out.state.evaluations
    );
}

#[test]
fn csa_climb_switches_to_focal_once_sigma_is_small() {
    let f = Sphere::new(5, 0.0).unwrap();
    let strategy = StrategyConfig::default_for(5);
    let cfg = FocalConfig::new(0.05, 0.1, 0.1).with_switchover(Switchover::SigmaBelow(1e-3));
    let settings = RunSettings {
        budget: 8_000,
        seed: 2,
        initial_mean: vec![2.0; 5],
        initial_sigma: 0.5,
        regime: Regime::Full,
        wrap: WrapPolicy::Unbounded,
    };
    let out = run(&f, &strategy, StepSizeControl::Focal(cfg), &settings).unwrap();
    let g = out.trace.switch_generation.expect("climb converged");
    assert!(out.climb_converged);
    for r in &out.trace.rows {
        let expected = if r.generation < g {
            Phase::Climb
        } else {
            Phase::Learn
        };
        assert_eq!(r.phase, expected, "generation {}", r.generation);
    }
}

#[test]
fn wrapped_phase_run_stays_in_the_box() {
    let spec = PulseSpec {
        pixels: 8,
        ..PulseSpec::default()
    };
    let f = Shg::new(spec, 0.0).unwrap();
    let n = f.dim();
    let strategy = StrategyConfig::default_for(n);
    let cfg = FocalConfig::new(0.3, 0.1, 0.1).with_switchover(Switchover::Immediate);
    let settings = RunSettings {
        budget: 2_000,
        seed: 9,
        initial_mean: vec![6.0; n],
        initial_sigma: 0.3,
        regime: Regime::Full,
        wrap: WrapPolicy::wrap_2pi(),
    };
    let out = run(&f, &strategy, StepSizeControl::Focal(cfg), &settings).unwrap();
    assert!(out
        .state
        .mean
        .iter()
        .all(|&x| (0.0..std::f64::consts::TAU).contains(&x)));
    assert!(out.trace.rows.iter().all(|r| r.rejected == 0));
}
