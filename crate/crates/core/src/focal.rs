//! Forced step-size control, practical-step diagnostics and the
//! regularised covariance inversion.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::covariance::{CovarianceModel, Regime};
use crate::landscape::Landscape;
use crate::linalg::Matrix;
use crate::phase::WrapPolicy;
use crate::strategy::{self, SearchState, StrategyConfig};
use crate::{invalid, Error, Result};

pub const DEFAULT_TIKHONOV: f64 = 1e-7;
pub const DEFAULT_SWITCH_SIGMA: f64 = 1e-4;

/// When the climbing phase (CSA) hands over to forced step-size control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Switchover {
    /// Forced control from the first generation.
    Immediate,
    /// Switch once the CSA step-size drops below the threshold.
    SigmaBelow(f64),
    /// Switch after this many generations.
    GenerationAt(u64),
}

impl Default for Switchover {
    fn default() -> Self {
        Switchover::SigmaBelow(DEFAULT_SWITCH_SIGMA)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FocalConfig {
    pub sigma0: f64,
    pub alpha: f64,
    pub c_cov: f64,
    pub tikhonov: f64,
    pub switchover: Switchover,
}

impl FocalConfig {
    pub fn new(sigma0: f64, alpha: f64, c_cov: f64) -> Self {
        Self {
            sigma0,
            alpha,
            c_cov,
            tikhonov: DEFAULT_TIKHONOV,
            switchover: Switchover::default(),
        }
    }

    pub fn with_switchover(mut self, switchover: Switchover) -> Self {
        self.switchover = switchover;
        self
    }

    pub fn with_tikhonov(mut self, eps: f64) -> Self {
        self.tikhonov = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(invalid("sigma0 must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(invalid(format!(
                "alpha must lie in (0, 1/2], got {}",
                self.alpha
            )));
        }
        if !(self.c_cov > 0.0 && self.c_cov < 1.0) {
            return Err(invalid(format!(
                "c_cov must lie in (0, 1), got {}",
                self.c_cov
            )));
        }
        if !(self.tikhonov > 0.0 && self.tikhonov.is_finite()) {
            return Err(invalid("Tikhonov parameter must be positive"));
        }
        if let Switchover::SigmaBelow(t) = self.switchover {
            if !(t > 0.0) {
                return Err(invalid("switchover threshold must be positive"));
            }
        }
        Ok(())
    }

    /// Soft-bound diagnostics; empty when the settings look reasonable.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.01..=0.10).contains(&self.c_cov) {
            out.push(format!(
                "c_cov = {} is outside the recommended range [0.01, 0.10]",
                self.c_cov
            ));
        }
        out
    }
}

/// `σ = σ₀ · λ_min^{−α}`.
pub fn focal_sigma(lambda_min: f64, cfg: &FocalConfig) -> Result<f64> {
    if !(lambda_min > 0.0) {
        return Err(Error::Contract("lambda_min must be positive"));
    }
    Ok(cfg.sigma0 * lambda_min.powf(-cfg.alpha))
}

/// RMS parent-offspring displacement `(σ/√μ_eff) √tr(C)`.
pub fn practical_step(sigma: f64, cov: &CovarianceModel, mu_eff: f64) -> f64 {
    sigma / mu_eff.sqrt() * cov.trace().sqrt()
}

/// `(σ₀√n λ_min^{1/2−α}, σ₀√n λ_max^{1/2} λ_min^{−α})`.
pub fn practical_step_bounds(sigma0: f64, alpha: f64, cov: &CovarianceModel) -> (f64, f64) {
    let n = cov.dim() as f64;
    let (lo, hi) = (cov.lambda_min(), cov.lambda_max());
    let base = sigma0 * n.sqrt() * lo.powf(-alpha);
    (base * lo.sqrt(), base * hi.sqrt())
}

/// Extremes of `σ√tr(C)` given the spectrum: `σ√(n λ_min)` and `σ√(n λ_max)`.
/// Coincides with [`practical_step_bounds`] when `σ` follows [`focal_sigma`].
pub fn step_bounds_for_sigma(sigma: f64, cov: &CovarianceModel) -> (f64, f64) {
    let n = cov.dim() as f64;
    (
        sigma * (n * cov.lambda_min()).sqrt(),
        sigma * (n * cov.lambda_max()).sqrt(),
    )
}

/// `h = λ / (λ² + ε)`.
#[inline]
pub fn tikhonov(lambda: f64, eps: f64) -> f64 {
    lambda / (lambda * lambda + eps)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PracticalStepRecord {
    pub generation: u64,
    pub sigma: f64,
    pub trace: f64,
    pub cond: f64,
    /// With the run's `μ_eff`.
    pub delta_p: f64,
    /// With `μ_eff = 1`; compared against the bounds.
    pub delta_p_unit: f64,
    pub lower: f64,
    pub upper: f64,
    /// RMS of `‖x_k − parent‖` over the generation's offspring.
    pub empirical_step: f64,
}

impl PracticalStepRecord {
    /// Position of `delta_p_unit` within `[lower, upper]`; 0 when the bounds
    /// coincide.
    pub fn proximity(&self) -> f64 {
        let width = self.upper - self.lower;
        if width <= 1e-12 * self.upper.abs() {
            0.0
        } else {
            (self.delta_p_unit - self.lower) / width
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Climb,
    Learn,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub generation: u64,
    pub evaluations: u64,
    /// Best offspring fitness as observed (landscape orientation).
    pub best_fitness: f64,
    /// Noiseless fitness of the recombined parent (landscape orientation).
    pub parent_fitness: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub phase: Phase,
    pub rejected: usize,
    pub step: PracticalStepRecord,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    /// First generation run under forced control.
    pub switch_generation: Option<u64>,
}

impl RunTrace {
    pub fn learning_rows(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(|r| r.phase == Phase::Learn)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HessianEstimate {
    pub matrix: Matrix,
    /// Nonincreasing.
    pub spectrum: Vec<f64>,
    /// Column `i` belongs to `spectrum[i]`.
    pub eigenvectors: Matrix,
    /// Covariance eigenvalue each `spectrum[i]` came from.
    pub covariance_spectrum: Vec<f64>,
    /// `order[i]` is the covariance eigen-index behind `spectrum[i]`.
    pub order: Vec<usize>,
    pub tikhonov: f64,
    pub evaluations: u64,
}

/// Maps the covariance spectrum through [`tikhonov`] and reassembles
/// `H = R diag(h) Rᵀ` with the covariance eigenvectors.
pub fn regularize_and_invert(
    cov: &CovarianceModel,
    eps: f64,
    evaluations: u64,
) -> Result<HessianEstimate> {
    if cov.is_dirty() {
        return Err(Error::Contract(
            "eigendecomposition must be current before inversion",
        ));
    }
    if !(eps > 0.0) {
        return Err(invalid("Tikhonov parameter must be positive"));
    }
    let n = cov.dim();
    let lambdas = cov.eigenvalues();
    let h: Vec<f64> = lambdas.iter().map(|&l| tikhonov(l, eps)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| h[b].total_cmp(&h[a]).then(a.cmp(&b)));
    let r = cov.rotation();
    let eigenvectors = Matrix::from_fn(n, |i, j| r[(i, order[j])]);
    let spectrum: Vec<f64> = order.iter().map(|&k| h[k]).collect();
    Ok(HessianEstimate {
        matrix: Matrix::from_spectrum(&eigenvectors, &spectrum),
        covariance_spectrum: order.iter().map(|&k| lambdas[k]).collect(),
        spectrum,
        eigenvectors,
        order,
        tikhonov: eps,
        evaluations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSizeControl {
    /// Plain cumulative step-size adaptation for the whole run.
    Csa,
    Focal(FocalConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub budget: u64,
    pub seed: u64,
    pub initial_mean: Vec<f64>,
    /// Ignored by [`Switchover::Immediate`], which starts at `σ₀`.
    pub initial_sigma: f64,
    pub regime: Regime,
    pub wrap: WrapPolicy,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub estimate: HessianEstimate,
    pub trace: RunTrace,
    pub state: SearchState,
    /// False when a forced-control run spent its budget without reaching
    /// the switchover. Always true for plain CSA.
    pub climb_converged: bool,
}

/// Error plus everything recorded up to the failure.
#[derive(Clone, Debug)]
pub struct RunFailure {
    pub error: Error,
    pub trace: RunTrace,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} generations)",
            self.error,
            self.trace.rows.len()
        )
    }
}

impl core::error::Error for RunFailure {}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        RunFailure {
            error,
            trace: RunTrace::default(),
        }
    }
}

fn fail(error: Error, trace: &mut RunTrace) -> RunFailure {
    RunFailure {
        error,
        trace: core::mem::take(trace),
    }
}

/// Runs the strategy until the budget is spent and inverts the final
/// covariance.
///
/// Under [`StepSizeControl::Focal`] the focal `c_cov` replaces the strategy's
/// for the whole run, the covariance carries over the switchover unchanged,
/// and from the switch on `σ = σ₀ λ_min^{−α}` after every eigen-refresh.
pub fn run(
    landscape: &dyn Landscape,
    config: &StrategyConfig,
    control: StepSizeControl,
    settings: &RunSettings,
) -> core::result::Result<RunOutcome, RunFailure> {
    config.validate()?;
    let n = config.n;
    if landscape.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: landscape.dim(),
        }
        .into());
    }
    if settings.initial_mean.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: settings.initial_mean.len(),
        }
        .into());
    }
    if settings.budget < config.lambda as u64 {
        return Err(invalid("budget must cover at least one generation").into());
    }
    let (focal, c_cov, eps) = match control {
        StepSizeControl::Csa => (None, config.c_cov, DEFAULT_TIKHONOV),
        StepSizeControl::Focal(f) => {
            f.validate()?;
            (Some(f), f.c_cov, f.tikhonov)
        }
    };

    let orientation = landscape.orientation();
    let mut state = SearchState::new(
        settings.initial_mean.clone(),
        settings.initial_sigma,
        settings.regime,
        settings.seed,
    )?;
    let mut trace = RunTrace::default();
    let mut phase = Phase::Climb;
    if let Some(f) = &focal {
        if f.switchover == Switchover::Immediate || f.switchover == Switchover::GenerationAt(0) {
            phase = Phase::Learn;
            trace.switch_generation = Some(0);
            state.sigma = focal_sigma(state.cov.lambda_min(), f)?;
        }
    }

    while state.evaluations + config.lambda as u64 <= settings.budget {
        let mut generation =
            strategy::sample_generation(&mut state, config, landscape, settings.wrap)
                .map_err(|e| fail(e, &mut trace))?;
        let rec = strategy::rank_and_recombine(&mut generation.offspring, config)
            .map_err(|e| fail(e, &mut trace))?;
        let parent = core::mem::replace(&mut state.mean, rec.mean);
        let sq_steps: f64 = generation
            .offspring
            .iter()
            .map(|o| {
                o.x.iter()
                    .zip(&parent)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum();
        let empirical_step = (sq_steps / generation.offspring.len() as f64).sqrt();

        strategy::update_path(&mut state.path_c, &rec.y_w, config);
        strategy::update_covariance(
            &mut state.cov,
            &state.path_c,
            &generation.offspring,
            &rec.selected,
            config,
            c_cov,
        );
        let sigma_csa = strategy::csa_update_sigma(&mut state, &rec.z_w, config);
        state.cov.refresh_eigen().map_err(|e| fail(e, &mut trace))?;
        state.generation += 1;

        if phase == Phase::Climb {
            state.sigma = sigma_csa;
            if let Some(f) = &focal {
                let switch = match f.switchover {
                    Switchover::Immediate => true,
                    Switchover::SigmaBelow(t) => sigma_csa < t,
                    Switchover::GenerationAt(g) => state.generation >= g,
                };
                if switch {
                    phase = Phase::Learn;
                    trace.switch_generation = Some(state.generation);
                }
            }
        }
        if phase == Phase::Learn {
            if let Some(f) = &focal {
                state.sigma =
                    focal_sigma(state.cov.lambda_min(), f).map_err(|e| fail(e, &mut trace))?;
            }
        }
        if !state.is_finite() {
            return Err(fail(
                Error::NonFiniteState {
                    generation: state.generation,
                },
                &mut trace,
            ));
        }

        let best = generation
            .offspring
            .iter()
            .map(|o| o.fitness)
            .fold(f64::INFINITY, f64::min);
        let (lower, upper) = step_bounds_for_sigma(state.sigma, &state.cov);
        trace.rows.push(TraceRow {
            generation: state.generation,
            evaluations: state.evaluations,
            best_fitness: orientation.to_minimization(best),
            parent_fitness: landscape.value(&state.mean),
            lambda_min: state.cov.lambda_min(),
            lambda_max: state.cov.lambda_max(),
            phase,
            rejected: generation.rejected,
            step: PracticalStepRecord {
                generation: state.generation,
                sigma: state.sigma,
                trace: state.cov.trace(),
                cond: state.cov.condition(),
                delta_p: practical_step(state.sigma, &state.cov, config.mu_eff),
                delta_p_unit: practical_step(state.sigma, &state.cov, 1.0),
                lower,
                upper,
                empirical_step,
            },
        });
    }

    let estimate = regularize_and_invert(&state.cov, eps, state.evaluations)
        .map_err(|e| fail(e, &mut trace))?;
    let climb_converged = focal.is_none() || trace.switch_generation.is_some();
    Ok(RunOutcome {
        estimate,
        trace,
        state,
        climb_converged,
    })
}

/// [`run`] with forced step-size control and the full-covariance kernel.
pub fn run_focal(
    landscape: &dyn Landscape,
    config: &StrategyConfig,
    focal: FocalConfig,
    budget: u64,
    seed: u64,
    initial_mean: Vec<f64>,
) -> core::result::Result<RunOutcome, RunFailure> {
    let settings = RunSettings {
        budget,
        seed,
        initial_mean,
        initial_sigma: focal.sigma0,
        regime: Regime::Full,
        wrap: WrapPolicy::Unbounded,
    };
    run(landscape, config, StepSizeControl::Focal(focal), &settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{RankDeficientQuadratic, RankDeficientSpec, Sphere};
    use crate::linalg::SymmetricEigen;
    use alloc::vec;
    use proptest::prelude::*;

    fn cov(m: Matrix) -> CovarianceModel {
        CovarianceModel::from_matrix(m, Regime::Full).unwrap()
    }

    #[test]
    fn focal_sigma_examples() {
        let cfg = FocalConfig::new(0.075, 0.25, 0.04);
        assert!((focal_sigma(1e-4, &cfg).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(focal_sigma(1.0, &cfg).unwrap(), 0.075);
        assert!(focal_sigma(0.0, &cfg).is_err());
        assert!(FocalConfig::new(0.1, 0.0, 0.04).validate().is_err());
        assert!(FocalConfig::new(0.1, 0.5, 0.04).validate().is_ok());
        assert!(FocalConfig::new(0.1, 0.2, 0.2).warnings().len() == 1);
        assert!(FocalConfig::new(0.1, 0.2, 0.05).warnings().is_empty());
    }

    #[test]
    fn practical_step_examples() {
        let id = CovarianceModel::identity(4, Regime::Full);
        assert!((practical_step(0.5, &id, 1.0) - 1.0).abs() < 1e-15);
        assert!((practical_step(1.0, &id, 4.0) - 1.0).abs() < 1e-15);
        let c = cov(Matrix::from_diagonal(&[3.0, 1.0]));
        assert!((practical_step(1.0, &c, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bounds_examples() {
        let id = CovarianceModel::identity(9, Regime::Full);
        let (lo, hi) = practical_step_bounds(0.2, 0.3, &id);
        assert!((lo - 0.6).abs() < 1e-15 && (hi - 0.6).abs() < 1e-15);
        let c = cov(Matrix::from_diagonal(&[4.0, 1.0]));
        let (lo, hi) = practical_step_bounds(1.0, 0.25, &c);
        assert!((lo - 2f64.sqrt()).abs() < 1e-12);
        assert!((hi - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bounds_enclose_practical_step_under_focal_sigma() {
        let c = cov(Matrix::from_diagonal(&[5.0, 0.3, 0.01, 2.0]));
        let f = FocalConfig::new(0.3, 0.2, 0.05);
        let sigma = focal_sigma(c.lambda_min(), &f).unwrap();
        let (lo, hi) = practical_step_bounds(f.sigma0, f.alpha, &c);
        let (lo2, hi2) = step_bounds_for_sigma(sigma, &c);
        assert!((lo - lo2).abs() < 1e-12 && (hi - hi2).abs() < 1e-12);
        let dp = practical_step(sigma, &c, 1.0);
        assert!(lo <= dp && dp <= hi);
    }

    #[test]
    fn tikhonov_examples() {
        assert!((tikhonov(1.0, 1e-7) - 0.999_999_9).abs() < 1e-12);
        assert!((tikhonov(1e-3, 1e-7) - 909.090_909_090_909).abs() < 1e-6);
        assert!(tikhonov(1e-30, 1e-7) < 1e-20);
        let peak = tikhonov(1e-7f64.sqrt(), 1e-7);
        assert!((peak - 1.0 / (2.0 * 1e-7f64.sqrt())).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn tikhonov_unimodal(a in -12.0f64..4.0, b in -12.0f64..4.0) {
            let eps = 1e-7;
            let (la, lb) = (10f64.powf(a.min(b)), 10f64.powf(a.max(b)));
            let root = eps.sqrt();
            let (ha, hb) = (tikhonov(la, eps), tikhonov(lb, eps));
            prop_assert!(ha <= 1.0 / (2.0 * root) * (1.0 + 1e-12));
            if lb <= root { prop_assert!(ha <= hb * (1.0 + 1e-12)); }
            if la >= root { prop_assert!(ha >= hb * (1.0 - 1e-12)); }
        }

        #[test]
        fn sigma_nonincreasing_in_lambda_min(a in 1e-8f64..10.0, b in 1e-8f64..10.0) {
            let f = FocalConfig::new(0.1, 0.3, 0.05);
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(focal_sigma(lo, &f).unwrap() >= focal_sigma(hi, &f).unwrap());
        }
    }

    #[test]
    fn well_conditioned_round_trip() {
        let b = crate::landscape::random_orthonormal(6, 11);
        let c = cov(Matrix::from_spectrum(&b, &[3.0, 1.5, 0.9, 0.4, 0.2, 0.1]));
        let est = regularize_and_invert(&c, 1e-7, 0).unwrap();
        let hc = est.matrix.matmul(c.matrix());
        let err = hc.sub(&Matrix::identity(6)).frobenius_norm() / 6f64.sqrt();
        assert!(err < 1e-5, "{err}");
        assert!(est.spectrum.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = Matrix::from_spectrum(&est.eigenvectors, &est.spectrum);
        assert!(rebuilt.sub(&est.matrix).frobenius_norm() <= 1e-10 * est.matrix.frobenius_norm());
    }

    #[test]
    fn hessian_shares_covariance_eigenvectors() {
        let b = crate::landscape::random_orthonormal(5, 3);
        let c = cov(Matrix::from_spectrum(&b, &[1e-9, 2.0, 1e-3, 0.5, 1e-5]));
        let est = regularize_and_invert(&c, 1e-7, 0).unwrap();
        for (j, &k) in est.order.iter().enumerate() {
            let hv = est.eigenvectors.column(j);
            let cv = c.rotation().column(k);
            let d = crate::linalg::dot(&hv, &cv).abs();
            assert!((d - 1.0).abs() < 1e-10);
            assert_eq!(est.covariance_spectrum[j], c.eigenvalues()[k]);
        }
        // independently decomposed H has the same spectrum
        let eig = SymmetricEigen::new(&est.matrix).unwrap();
        for (a, b) in eig.values.iter().zip(&est.spectrum) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0));
        }
    }

    #[test]
    fn sphere_recovers_isotropic_hessian() {
        let sphere = Sphere::new(10, 0.0).unwrap();
        let cfg = StrategyConfig::default_for(10);
        let focal = FocalConfig::new(0.01, 0.1, 0.01).with_switchover(Switchover::Immediate);
        let out = run_focal(&sphere, &cfg, focal, 20_000, 5, vec![0.0; 10]).unwrap();
        let cond = est_cond(&out.estimate);
        assert!(cond < 2.0, "cond(H) = {cond}");
        assert!(out.climb_converged);
        assert!(out.estimate.evaluations <= 20_000);
    }

    fn est_cond(e: &HessianEstimate) -> f64 {
        e.spectrum[0] / e.spectrum[e.spectrum.len() - 1]
    }

    #[test]
    fn trace_rows_and_lower_bound() {
        let sphere = Sphere::new(6, 0.0).unwrap();
        let cfg = StrategyConfig::default_for(6);
        let focal = FocalConfig::new(0.05, 0.2, 0.05);
        let settings = RunSettings {
            budget: 3000,
            seed: 1,
            initial_mean: vec![1.0; 6],
            initial_sigma: 0.5,
            regime: Regime::Full,
            wrap: WrapPolicy::Unbounded,
        };
        let out = run(&sphere, &cfg, StepSizeControl::Focal(focal), &settings).unwrap();
        let rows = &out.trace.rows;
        assert_eq!(rows.len() as u64, 3000 / cfg.lambda as u64);
        assert!(rows.windows(2).all(|w| w[1].evaluations > w[0].evaluations));
        assert!(out.trace.switch_generation.is_some());
        for r in out.trace.learning_rows() {
            let s = &r.step;
            assert!(s.delta_p_unit >= s.lower * 0.95 && s.delta_p_unit <= s.upper * 1.05);
            if r.lambda_min <= 1.0 {
                assert!(s.sigma >= focal.sigma0);
            }
        }
    }

    #[test]
    fn unconverged_climb_is_flagged() {
        let land = RankDeficientQuadratic::new(RankDeficientSpec {
            n: 4,
            spectrum: vec![1.0, 1.0],
            rotation_seed: Some(2),
            noise: 0.1,
        })
        .unwrap();
        let cfg = StrategyConfig::default_for(4);
        let focal =
            FocalConfig::new(0.05, 0.2, 0.05).with_switchover(Switchover::GenerationAt(1_000_000));
        let settings = RunSettings {
            budget: 200,
            seed: 0,
            initial_mean: vec![1.0; 4],
            initial_sigma: 0.5,
            regime: Regime::Full,
            wrap: WrapPolicy::Unbounded,
        };
        let out = run(&land, &cfg, StepSizeControl::Focal(focal), &settings).unwrap();
        assert!(!out.climb_converged);
        assert!(out.trace.rows.iter().all(|r| r.phase == Phase::Climb));
    }

    #[test]
    fn budget_below_lambda_is_rejected() {
        let sphere = Sphere::new(3, 0.0).unwrap();
        let cfg = StrategyConfig::default_for(3);
        let f = FocalConfig::new(0.1, 0.2, 0.05);
        let err = run_focal(&sphere, &cfg, f, 2, 0, vec![0.0; 3]).unwrap_err();
        assert!(matches!(err.error, Error::InvalidConfig(_)));
    }

    #[test]
    fn runs_are_deterministic() {
        let sphere = Sphere::new(5, 0.05).unwrap();
        let cfg = StrategyConfig::default_for(5);
        let f = FocalConfig::new(0.1, 0.2, 0.05).with_switchover(Switchover::Immediate);
        let a = run_focal(&sphere, &cfg, f, 800, 9, vec![0.0; 5]).unwrap();
        let b = run_focal(&sphere, &cfg, f, 800, 9, vec![0.0; 5]).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.estimate, b.estimate);
    }
}
