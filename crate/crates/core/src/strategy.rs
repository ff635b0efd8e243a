//! Non-elitist `(μ_W, λ)` strategy kernel: sampling, ranking, weighted
//! recombination, evolution paths and cumulative step-size adaptation.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::covariance::{CovarianceModel, Regime};
use crate::landscape::Landscape;
use crate::phase::{self, WrapPolicy, REJECT_ATTEMPTS_PER_OFFSPRING};
use crate::rng::{search_rng, NoiseStreams, SearchRng};
use crate::{invalid, Error, Result};

/// Population sizes, recombination weights and learning constants.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyConfig {
    pub n: usize,
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    /// `1 / Σ w_i²`.
    pub mu_eff: f64,
    /// Total covariance learning rate.
    pub c_cov: f64,
    /// Fraction of `c_cov` given to the rank-one (path) term; the rest goes
    /// to the rank-μ term.
    pub rank_one_share: f64,
    /// Cumulation constant of the covariance path.
    pub c_c: f64,
    /// Cumulation constant of the step-size path.
    pub c_sigma: f64,
    /// Step-size damping.
    pub d_sigma: f64,
    /// `E‖N(0, I)‖`.
    pub chi_n: f64,
}

/// `w_i ∝ ln(μ + 1) − ln(i)`, normalised to sum to one.
pub fn log_weights(mu: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=mu)
        .map(|i| ((mu + 1) as f64).ln() - (i as f64).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn mu_eff(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// `E‖N(0, I_n)‖ ≈ √n (1 − 1/(4n) + 1/(21n²))`.
pub fn expected_norm(n: usize) -> f64 {
    let nf = n as f64;
    nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf))
}

/// Default CMA covariance learning rate, `O(1/n²)` for the full regime and
/// scaled by `(n + 1.5)/3` for the separable one.
pub fn default_c_cov(n: usize, mu_eff: f64, regime: Regime) -> f64 {
    let nf = n as f64;
    let mu_cov = mu_eff;
    let c = (1.0 / mu_cov) * 2.0 / ((nf + 2f64.sqrt()) * (nf + 2f64.sqrt()))
        + (1.0 - 1.0 / mu_cov)
            * (1.0f64).min((2.0 * mu_eff - 1.0) / ((nf + 2.0) * (nf + 2.0) + mu_eff));
    match regime {
        Regime::Full => c,
        Regime::Diagonal => (c * (nf + 1.5) / 3.0).min(1.0),
        Regime::Isotropic => 0.0,
    }
}

impl StrategyConfig {
    /// Default population `λ = 4 + ⌊3 ln n⌋`, `μ = ⌊λ/2⌋`.
    pub fn default_for(n: usize) -> Self {
        let lambda = 4 + (3.0 * (n.max(1) as f64).ln()).floor() as usize;
        Self::with_population(n, lambda, lambda / 2).expect("default population is valid")
    }

    /// Logarithmic weights and default constants for the full regime.
    pub fn with_population(n: usize, lambda: usize, mu: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if lambda < 2 || mu < 1 || mu > lambda {
            return Err(invalid(
                "population must satisfy lambda >= 2 and 1 <= mu <= lambda",
            ));
        }
        let weights = log_weights(mu);
        let cfg = Self::from_weights(n, lambda, weights)?;
        Ok(cfg)
    }

    /// Custom recombination weights (nonincreasing, positive, summing to 1).
    pub fn from_weights(n: usize, lambda: usize, weights: Vec<f64>) -> Result<Self> {
        let mu = weights.len();
        let me = mu_eff(&weights);
        let nf = n as f64;
        let c_sigma = (me + 2.0) / (nf + me + 5.0);
        let d_sigma = 1.0 + 2.0 * (0.0f64).max(((me - 1.0) / (nf + 1.0)).sqrt() - 1.0) + c_sigma;
        let cfg = Self {
            n,
            lambda,
            mu,
            mu_eff: me,
            c_cov: default_c_cov(n, me, Regime::Full),
            rank_one_share: 1.0 / me,
            c_c: (4.0 + me / nf) / (nf + 4.0 + 2.0 * me / nf),
            c_sigma,
            d_sigma,
            chi_n: expected_norm(n),
            weights,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_c_cov(mut self, c_cov: f64) -> Result<Self> {
        self.c_cov = c_cov;
        self.validate()?;
        Ok(self)
    }

    /// Replaces `c_cov` by the default for `regime`.
    pub fn with_regime_default(mut self, regime: Regime) -> Self {
        self.c_cov = default_c_cov(self.n, self.mu_eff, regime);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 2 || self.mu < 1 || self.mu > self.lambda || self.weights.len() != self.mu
        {
            return Err(invalid(
                "population must satisfy lambda >= 2 and 1 <= mu <= lambda",
            ));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid("recombination weights must sum to 1"));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) || self.weights.windows(2).any(|p| p[1] > p[0])
        {
            return Err(invalid(
                "recombination weights must be positive and nonincreasing",
            ));
        }
        if !(self.c_cov >= 0.0 && self.c_cov < 1.0) && self.c_cov != 1.0 {
            return Err(invalid("c_cov must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.rank_one_share) {
            return Err(invalid("rank-one share must lie in [0, 1]"));
        }
        if !(self.c_c > 0.0 && self.c_c <= 1.0) {
            return Err(invalid("c_c must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// One sampled candidate.
#[derive(Clone, Debug)]
pub struct Offspring {
    /// Standard-normal draw (a-posteriori vector if the point was wrapped).
    pub z: Vec<f64>,
    /// `R Λ^{1/2} z`.
    pub y: Vec<f64>,
    /// `parent + σ y`.
    pub x: Vec<f64>,
    /// Observed fitness in the minimisation convention.
    pub fitness: f64,
    pub rank: Option<usize>,
    pub wrapped: bool,
}

/// Mutable state of one search.
#[derive(Clone, Debug)]
pub struct SearchState {
    pub mean: Vec<f64>,
    pub sigma: f64,
    pub cov: CovarianceModel,
    pub path_c: Vec<f64>,
    pub path_sigma: Vec<f64>,
    pub generation: u64,
    /// Objective evaluations consumed so far.
    pub evaluations: u64,
    rng: SearchRng,
    noise: NoiseStreams,
}

impl SearchState {
    pub fn new(mean: Vec<f64>, sigma: f64, regime: Regime, seed: u64) -> Result<Self> {
        if mean.is_empty() {
            return Err(invalid("initial mean must be non-empty"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("initial step-size must be positive"));
        }
        let n = mean.len();
        Ok(Self {
            mean,
            sigma,
            cov: CovarianceModel::identity(n, regime),
            path_c: vec![0.0; n],
            path_sigma: vec![0.0; n],
            generation: 0,
            evaluations: 0,
            rng: search_rng(seed),
            noise: NoiseStreams::new(seed),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn is_finite(&self) -> bool {
        self.sigma.is_finite()
            && self.sigma > 0.0
            && self.mean.iter().all(|v| v.is_finite())
            && self.path_c.iter().all(|v| v.is_finite())
            && self.path_sigma.iter().all(|v| v.is_finite())
            && self.cov.matrix().is_finite()
    }

    fn standard_normal(&mut self) -> Vec<f64> {
        (0..self.dim())
            .map(|_| StandardNormal.sample(&mut self.rng))
            .collect()
    }
}

/// Offspring of one generation plus rejection bookkeeping.
#[derive(Clone, Debug)]
pub struct Generation {
    pub offspring: Vec<Offspring>,
    /// Candidates discarded (never evaluated) under the reject policy.
    pub rejected: usize,
}

fn candidate(state: &SearchState, z: Vec<f64>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let y = state.cov.transform(&z);
    let x = state
        .mean
        .iter()
        .zip(&y)
        .map(|(m, yi)| m + state.sigma * yi)
        .collect();
    (z, y, x)
}

/// Draws `λ` offspring `x = parent + σ R Λ^{1/2} z` and evaluates each once.
/// Noise for evaluation number `e` comes from its own substream, so the
/// result does not depend on evaluation order.
pub fn sample_generation(
    state: &mut SearchState,
    config: &StrategyConfig,
    objective: &dyn Landscape,
    policy: WrapPolicy,
) -> Result<Generation> {
    let n = state.dim();
    if objective.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: objective.dim(),
        });
    }
    if config.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: config.n,
        });
    }
    if state.cov.is_dirty() {
        return Err(Error::Contract(
            "eigendecomposition must be current before sampling",
        ));
    }
    let orientation = objective.orientation();
    let mut offspring = Vec::with_capacity(config.lambda);
    let mut rejected = 0usize;
    let mut attempts_left = REJECT_ATTEMPTS_PER_OFFSPRING * config.lambda;

    for k in 0..config.lambda {
        let z = state.standard_normal();
        let (mut z, mut y, mut x) = candidate(state, z);
        let mut wrapped = false;
        match policy {
            WrapPolicy::Unbounded => {}
            WrapPolicy::Reject { period } => {
                while !phase::in_box(&x, period) && attempts_left > 0 {
                    attempts_left -= 1;
                    rejected += 1;
                    let fresh = state.standard_normal();
                    (z, y, x) = candidate(state, fresh);
                }
                if !phase::in_box(&x, period) {
                    // attempt cap reached: fold this one back instead
                    (z, y, x, wrapped) = fold(state, period, z, y, x);
                }
            }
            WrapPolicy::Wrap { period } => {
                (z, y, x, wrapped) = fold(state, period, z, y, x);
            }
        }
        let mut noise = state.noise.stream(state.evaluations + k as u64);
        let raw = objective.evaluate(&x, &mut noise);
        let fitness = orientation.to_minimization(raw);
        if !fitness.is_finite() {
            return Err(Error::NonFiniteFitness {
                index: k,
                value: raw,
            });
        }
        offspring.push(Offspring {
            z,
            y,
            x,
            fitness,
            rank: None,
            wrapped,
        });
    }
    state.evaluations += config.lambda as u64;
    Ok(Generation {
        offspring,
        rejected,
    })
}

type Sample = (Vec<f64>, Vec<f64>, Vec<f64>, bool);

fn fold(state: &SearchState, period: f64, z: Vec<f64>, y: Vec<f64>, x: Vec<f64>) -> Sample {
    let xw = phase::wrap(&x, period);
    if xw == x {
        return (z, y, x, false);
    }
    let post = phase::posterior_mutation(&xw, &state.mean, state.sigma, &state.cov);
    let y_post = state.cov.transform(&post.z);
    (post.z, y_post, xw, true)
}

/// Output of [`rank_and_recombine`].
#[derive(Clone, Debug)]
pub struct Recombination {
    pub mean: Vec<f64>,
    /// Offspring indices of the `μ` selected, best first.
    pub selected: Vec<usize>,
    /// `Σ w_i z_{i:λ}`.
    pub z_w: Vec<f64>,
    /// `Σ w_i y_{i:λ}`.
    pub y_w: Vec<f64>,
}

/// Ranks by fitness (ascending; ties by lower index) and recombines the
/// best `μ` with the configured weights.
pub fn rank_and_recombine(
    offspring: &mut [Offspring],
    config: &StrategyConfig,
) -> Result<Recombination> {
    if offspring.is_empty() {
        return Err(Error::Contract("cannot recombine an empty population"));
    }
    if config.mu > offspring.len() {
        return Err(Error::Contract("fewer offspring than parents"));
    }
    let mut order: Vec<usize> = (0..offspring.len()).collect();
    order.sort_by(|&a, &b| {
        offspring[a]
            .fitness
            .total_cmp(&offspring[b].fitness)
            .then(a.cmp(&b))
    });
    for (rank, &idx) in order.iter().enumerate() {
        offspring[idx].rank = Some(rank);
    }
    let n = offspring[0].x.len();
    let mut mean = vec![0.0; n];
    let mut z_w = vec![0.0; n];
    let mut y_w = vec![0.0; n];
    let selected: Vec<usize> = order[..config.mu].to_vec();
    for (&idx, &w) in selected.iter().zip(&config.weights) {
        let o = &offspring[idx];
        for i in 0..n {
            mean[i] += w * o.x[i];
            z_w[i] += w * o.z[i];
            y_w[i] += w * o.y[i];
        }
    }
    Ok(Recombination {
        mean,
        selected,
        z_w,
        y_w,
    })
}

/// `p_c ← (1 − c_c) p_c + √(c_c (2 − c_c) μ_eff) · ⟨y⟩_W`; the stall
/// indicator of standard CMA is fixed at one.
pub fn update_path(path: &mut [f64], y_w: &[f64], config: &StrategyConfig) {
    let c = config.c_c;
    let gain = (c * (2.0 - c) * config.mu_eff).sqrt();
    for (p, y) in path.iter_mut().zip(y_w) {
        *p = (1.0 - c) * *p + gain * y;
    }
}

/// Applies the mixed rank-one / rank-μ update with learning rate `c_cov`.
pub fn update_covariance(
    cov: &mut CovarianceModel,
    path: &[f64],
    offspring: &[Offspring],
    selected: &[usize],
    config: &StrategyConfig,
    c_cov: f64,
) {
    let ys: Vec<&[f64]> = selected
        .iter()
        .map(|&i| offspring[i].y.as_slice())
        .collect();
    cov.adapt(path, &ys, &config.weights, c_cov, config.rank_one_share);
}

/// Cumulative step-size adaptation. Updates the conjugate path with
/// `R ⟨z⟩_W` (using the decomposition current at sampling time) and
/// returns `σ · exp((c_σ/d_σ)(‖p_σ‖/E‖N(0,I)‖ − 1))`.
pub fn csa_update_sigma(state: &mut SearchState, z_w: &[f64], config: &StrategyConfig) -> f64 {
    let c = config.c_sigma;
    let gain = (c * (2.0 - c) * config.mu_eff).sqrt();
    let rz = state.cov.rotate(z_w);
    for (p, v) in state.path_sigma.iter_mut().zip(&rz) {
        *p = (1.0 - c) * *p + gain * v;
    }
    csa_sigma(state.sigma, crate::linalg::norm(&state.path_sigma), config)
}

pub fn csa_sigma(sigma: f64, path_norm: f64, config: &StrategyConfig) -> f64 {
    sigma * ((config.c_sigma / config.d_sigma) * (path_norm / config.chi_n - 1.0)).exp()
}
