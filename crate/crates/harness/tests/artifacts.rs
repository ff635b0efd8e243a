use focal_core::analysis::{ComparisonOptions, SignConvention};
use focal_core::linalg::SymmetricEigen;
use focal_harness::config::{
    ExperimentConfig, Kernel, LandscapeConfig, Mechanism, SwitchoverConfig,
};
use focal_harness::experiment::{self, SPECTRUM_FILE, TRACE_FILE};
use focal_harness::io::{self, file_checksum};
use focal_harness::{execute, registry, run_experiment};

fn small_ellipse(seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        LandscapeConfig::Ellipse {
            n: 10,
            condition: 1e4,
            noise: 0.0,
        },
        Kernel::DefCma,
        Mechanism::Focal,
        seed,
    );
    c.budget = 4_000;
    c.strategy.lambda = Some(20);
    c.strategy.mu = Some(10);
    c.focal.c_cov = Some(0.08);
    c.focal.alpha = Some(0.1);
    c.focal.switchover = SwitchoverConfig::Immediate;
    c
}

#[test]
fn trace_header_echoes_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_ellipse(4);
    c.output = Some(dir.path().to_path_buf());
    run_experiment(&c).unwrap();
    let persisted = io::read_trace(&dir.path().join(TRACE_FILE)).unwrap();
    let expected = ExperimentConfig {
        output: None,
        ..c.resolved().unwrap()
    };
    assert_eq!(persisted.config, expected);
    assert_eq!(persisted.version, io::ARTIFACT_VERSION);
    assert_eq!(persisted.switch_generation, Some(0));

    let rerun = execute(&persisted.config).unwrap();
    let rows: Vec<u64> = persisted.rows.iter().map(|r| r.evaluations).collect();
    assert!(rows.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(rows.len() as u64, rerun.report.generations);
    assert_eq!(*rows.last().unwrap(), rerun.report.evaluations);
}

#[test]
fn identical_invocations_give_identical_checksums() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut c = small_ellipse(8);
    c.output = Some(a.path().to_path_buf());
    let ra = run_experiment(&c).unwrap();
    c.output = Some(b.path().to_path_buf());
    let rb = run_experiment(&c).unwrap();
    assert_eq!(ra.trace_checksum, rb.trace_checksum);
    for name in [
        TRACE_FILE,
        SPECTRUM_FILE,
        experiment::HESSIAN_FILE,
        experiment::COVARIANCE_FILE,
    ] {
        assert_eq!(
            file_checksum(&a.path().join(name)).unwrap(),
            file_checksum(&b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    assert_eq!(
        ra.trace_checksum,
        file_checksum(&a.path().join(TRACE_FILE)).unwrap()
    );
}

#[test]
fn matrix_files_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let exec = execute(&small_ellipse(2)).unwrap();
    let path = dir.path().join("h.txt");
    io::write_matrix(&path, "hessian", &exec.outcome.estimate.matrix).unwrap();
    assert_eq!(
        io::read_matrix(&path).unwrap(),
        exec.outcome.estimate.matrix
    );
}

#[test]
fn spectrum_without_reference_has_only_the_recovered_column() {
    let dir = tempfile::tempdir().unwrap();
    let exec = execute(&small_ellipse(3)).unwrap();
    let path = dir.path().join(SPECTRUM_FILE);
    let cmp = io::export_spectrum(
        &path,
        &exec.outcome.estimate,
        None,
        &ComparisonOptions::default(),
    )
    .unwrap();
    assert!(cmp.is_none());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains("log_rms_error"));
    assert!(text.lines().any(|l| l == "index,recovered"));
    let back = io::read_spectrum(&path).unwrap();
    assert_eq!(back.recovered, exec.outcome.estimate.spectrum);
    assert!(back.reference.is_none());
}

#[test]
fn identical_reference_gives_unit_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let exec = execute(&small_ellipse(3)).unwrap();
    let est = &exec.outcome.estimate;
    let path = dir.path().join(SPECTRUM_FILE);
    let cmp = io::export_spectrum(
        &path,
        est,
        Some((&est.spectrum, SignConvention::Minimize)),
        &ComparisonOptions::default(),
    )
    .unwrap()
    .unwrap();
    assert!(cmp.ratios.iter().all(|&r| r == 1.0));
    assert_eq!(cmp.log_rms_error, 0.0);
    assert_eq!(
        io::read_spectrum(&path).unwrap().reference.unwrap(),
        est.spectrum
    );
}

#[test]
fn ellipse_pipeline_populates_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_ellipse(5);
    c.output = Some(dir.path().to_path_buf());
    let report = run_experiment(&c).unwrap();
    let summary = report.spectrum.expect("analytic reference");
    assert!(
        summary.log_rms_error.is_finite() && summary.log_rms_error < 1.0,
        "{}",
        summary.log_rms_error
    );
    assert_eq!(summary.compared, 10);
    let text = std::fs::read_to_string(dir.path().join(SPECTRUM_FILE)).unwrap();
    assert!(text.contains("# log_rms_error = "));

    let landscape = registry::build(&c.landscape).unwrap();
    let analytic = SymmetricEigen::new(&landscape.analytic_hessian().unwrap())
        .unwrap()
        .values;
    let back = io::read_spectrum(&dir.path().join(SPECTRUM_FILE)).unwrap();
    let mut sorted = analytic.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    assert_eq!(back.reference.unwrap(), sorted);
}

#[test]
fn invalid_config_is_an_error() {
    let mut c = small_ellipse(1);
    c.budget = 5;
    assert!(execute(&c).is_err());
    let mut c = small_ellipse(1);
    c.focal.sigma0 = -1.0;
    assert!(execute(&c).is_err());
}

#[test]
fn unconverged_climb_still_succeeds_with_a_warning() {
    let mut c = small_ellipse(1);
    c.mechanism = Mechanism::Focal;
    c.focal.switchover = SwitchoverConfig::SigmaBelow(1e-12);
    c.initial.mean = focal_harness::config::StartPoint::Uniform(1.0);
    c.initial.sigma = Some(0.5);
    c.budget = 400;
    let exec = execute(&c).unwrap();
    assert!(!exec.report.climb_converged);
    assert!(exec
        .report
        .warnings
        .iter()
        .any(|w| w.contains("switchover")));
}

#[test]
fn iso_kernel_has_larger_parent_drops_on_rank6() {
    for seed in [1, 3] {
        let drop = |kernel| {
            let mut c = ExperimentConfig::new(
                registry::default_config("rankdef", Some(30)).unwrap(),
                kernel,
                Mechanism::Focal,
                seed,
            );
            c.budget = 20_000;
            execute(&c).unwrap().report.max_parent_drop
        };
        let def = drop(Kernel::DefCma);
        let iso = drop(Kernel::IsoCma);
        assert!(iso > 2.0 * def, "seed {seed}: iso {iso} vs def {def}");
    }
}
