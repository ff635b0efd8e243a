//! One configured run: execute, analyse, and persist artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use focal_core::analysis::{
    audit_practical_steps, fit_learning_rate, ComparisonOptions, FitWindow, SignConvention,
    SpectrumComparison,
};
use focal_core::focal::run;
use focal_core::linalg::SymmetricEigen;
use focal_core::{RunOutcome, RunTrace};
use serde::Serialize;

use crate::config::{ExperimentConfig, Mechanism};
use crate::io::{self, sha256_hex};
use crate::registry;
use crate::{config_error, io_error, HarnessError, Result};

pub const TRACE_FILE: &str = "trace.csv";
pub const COVARIANCE_FILE: &str = "covariance.txt";
pub const HESSIAN_FILE: &str = "hessian.txt";
pub const EIGENVECTORS_FILE: &str = "eigenvectors.txt";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const REPORT_FILE: &str = "report.toml";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub log_rms_error: f64,
    pub compared: usize,
    pub rank_estimate: usize,
    pub reference_rank: usize,
}

impl From<&SpectrumComparison> for SpectrumSummary {
    fn from(c: &SpectrumComparison) -> Self {
        Self {
            log_rms_error: c.log_rms_error,
            compared: c.compared,
            rank_estimate: c.rank_estimate,
            reference_rank: c.reference_rank,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearningSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub first_generation: u64,
    pub last_generation: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepSummary {
    pub checked: usize,
    pub violations: usize,
    pub median_proximity: f64,
    pub mean_proximity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub landscape: String,
    pub kernel: String,
    pub mechanism: String,
    pub seed: u64,
    pub generations: u64,
    pub evaluations: u64,
    pub climb_converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_generation: Option<u64>,
    pub final_sigma: f64,
    pub final_condition: f64,
    /// Largest rise of the parent's cost above the best parent seen so far.
    pub max_parent_drop: f64,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning: Option<LearningSummary>,
    pub steps: StepSummary,
    pub trace_checksum: String,
}

#[derive(Clone, Debug)]
pub struct Execution {
    pub config: ExperimentConfig,
    pub outcome: RunOutcome,
    pub comparison: Option<SpectrumComparison>,
    pub reference: Option<(Vec<f64>, SignConvention)>,
    pub report: ExperimentReport,
}

/// Cost excursions in minimisation sign: how far the parent falls behind
/// the best parent before it.
pub fn max_parent_drop(trace: &RunTrace, sign: SignConvention) -> f64 {
    let cost = |v: f64| match sign {
        SignConvention::Minimize => v,
        SignConvention::Maximize => -v,
    };
    let mut best = f64::INFINITY;
    let mut drop: f64 = 0.0;
    for r in &trace.rows {
        let c = cost(r.parent_fitness);
        if c.is_finite() {
            drop = drop.max(c - best);
            best = best.min(c);
        }
    }
    drop
}

/// Runs without touching the filesystem.
pub fn execute(config: &ExperimentConfig) -> Result<Execution> {
    let config = config.resolved()?;
    let landscape = registry::build(&config.landscape)?;
    let strategy = config.strategy_config()?;
    let control = config.control()?;
    let settings = config.run_settings(landscape.optimum())?;
    let mut warnings = Vec::new();
    if config.mechanism == Mechanism::Focal {
        warnings.extend(config.focal_config()?.warnings());
    }
    let outcome =
        run(landscape.as_ref(), &strategy, control, &settings).map_err(|f| HarnessError::Run {
            generations: f.trace.rows.len(),
            source: f.error,
        })?;
    if !outcome.climb_converged {
        let w = "climbing phase never met the switchover criterion; the estimate reflects the CSA covariance".to_string();
        log::warn!("{w}");
        warnings.push(w);
    }
    let sign = SignConvention::from(landscape.orientation());
    let reference = match landscape.analytic_hessian() {
        Some(h) => Some((SymmetricEigen::new(&h)?.values, sign)),
        None => None,
    };
    let comparison = match &reference {
        Some((r, s)) => Some(focal_core::analysis::compare_spectra_with(
            &outcome.estimate.spectrum,
            r,
            *s,
            &ComparisonOptions::default(),
        )?),
        None => None,
    };
    let learning = match config.mechanism {
        Mechanism::Focal => fit_learning_rate(&outcome.trace, FitWindow::FocalPhase).ok(),
        Mechanism::Csa => fit_learning_rate(&outcome.trace, FitWindow::All).ok(),
    };
    let audit = audit_practical_steps(&outcome.trace);
    let trace_text = io::render_trace(&config, &outcome.trace)?;
    let report = ExperimentReport {
        landscape: config.landscape.name().to_string(),
        kernel: config.kernel.name().to_string(),
        mechanism: config.mechanism.name().to_string(),
        seed: config.seed,
        generations: outcome.state.generation,
        evaluations: outcome.state.evaluations,
        climb_converged: outcome.climb_converged,
        switch_generation: outcome.trace.switch_generation,
        final_sigma: outcome.state.sigma,
        final_condition: outcome.state.cov.condition(),
        max_parent_drop: max_parent_drop(&outcome.trace, sign),
        warnings,
        spectrum: comparison.as_ref().map(SpectrumSummary::from),
        learning: learning.map(|f| LearningSummary {
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            first_generation: f.first_generation,
            last_generation: f.last_generation,
        }),
        steps: StepSummary {
            checked: audit.checked,
            violations: audit.violations,
            median_proximity: audit.median_proximity,
            mean_proximity: audit.mean_proximity,
        },
        trace_checksum: sha256_hex(trace_text.as_bytes()),
    };
    Ok(Execution {
        config,
        outcome,
        comparison,
        reference,
        report,
    })
}

/// Executes `config` and writes every artifact into its output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let dir = config
        .output
        .clone()
        .ok_or_else(|| config_error("no output directory configured"))?;
    fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    let exec = match execute(config) {
        Ok(e) => e,
        Err(e) => {
            log::error!("{e}");
            return Err(e);
        }
    };
    write_artifacts(&dir, &exec)?;
    log::info!(
        "{} {} seed {}: {} generations, {} evaluations -> {}",
        exec.report.landscape,
        exec.report.kernel,
        exec.report.seed,
        exec.report.generations,
        exec.report.evaluations,
        dir.display()
    );
    Ok(exec.report)
}

pub fn write_artifacts(dir: &Path, exec: &Execution) -> Result<Vec<PathBuf>> {
    let path = |name: &str| dir.join(name);
    let est = &exec.outcome.estimate;
    io::write_trace(&path(TRACE_FILE), &exec.config, &exec.outcome.trace)?;
    io::write_matrix(
        &path(COVARIANCE_FILE),
        "covariance",
        exec.outcome.state.cov.matrix(),
    )?;
    io::write_matrix(&path(HESSIAN_FILE), "hessian", &est.matrix)?;
    io::write_matrix(&path(EIGENVECTORS_FILE), "eigenvectors", &est.eigenvectors)?;
    let reference = exec.reference.as_ref().map(|(r, s)| (r.as_slice(), *s));
    io::export_spectrum(
        &path(SPECTRUM_FILE),
        est,
        reference,
        &ComparisonOptions::default(),
    )?;
    let cfg_path = path(CONFIG_FILE);
    fs::write(&cfg_path, exec.config.to_toml()?).map_err(io_error(&cfg_path))?;
    let report_path = path(REPORT_FILE);
    fs::write(&report_path, toml::to_string(&exec.report)?).map_err(io_error(&report_path))?;
    Ok([
        TRACE_FILE,
        COVARIANCE_FILE,
        HESSIAN_FILE,
        EIGENVECTORS_FILE,
        SPECTRUM_FILE,
        CONFIG_FILE,
        REPORT_FILE,
    ]
    .iter()
    .map(|n| path(n))
    .collect())
}
