//! Experiment configuration. Files are TOML; a loaded config is resolved so
//! every parameter that affects the run is explicit before it is echoed into
//! artifacts.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use focal_core::focal::{DEFAULT_SWITCH_SIGMA, DEFAULT_TIKHONOV};
use focal_core::{
    FocalConfig, Regime, RunSettings, StepSizeControl, StrategyConfig, Switchover, WrapPolicy,
};
use serde::{Deserialize, Serialize};

use crate::table1::{defaults_from_table1, RankClass};
use crate::{config_error, io_error, Result};

pub const DEFAULT_BUDGET: u64 = 30_000;
pub const DEFAULT_SIGMA0: f64 = 0.075;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    #[default]
    DefCma,
    SepCma,
    IsoCma,
}

impl Kernel {
    pub fn regime(self) -> Regime {
        match self {
            Kernel::DefCma => Regime::Full,
            Kernel::SepCma => Regime::Diagonal,
            Kernel::IsoCma => Regime::Isotropic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::DefCma => "def-cma",
            Kernel::SepCma => "sep-cma",
            Kernel::IsoCma => "iso-cma",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Csa,
    #[default]
    Focal,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Csa => "csa",
            Mechanism::Focal => "focal",
        }
    }
}

fn default_condition() -> f64 {
    1e4
}
fn default_rank() -> usize {
    6
}
fn default_span() -> f64 {
    0.5
}
fn default_pixels() -> usize {
    80
}
fn default_fwhm() -> f64 {
    1.0
}
fn default_one() -> usize {
    1
}
fn default_oversampling() -> usize {
    8
}
fn default_padding() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum LandscapeConfig {
    Ellipse {
        n: usize,
        #[serde(default = "default_condition")]
        condition: f64,
        #[serde(default)]
        noise: f64,
    },
    Rankdef {
        n: usize,
        #[serde(default = "default_rank")]
        rank: usize,
        /// Explicit curvatures; when absent they decay log-uniformly over
        /// `span_decades` from 1.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spectrum: Option<Vec<f64>>,
        #[serde(default = "default_span")]
        span_decades: f64,
        #[serde(default)]
        rotation_seed: u64,
        #[serde(default)]
        noise: f64,
    },
    Shg {
        #[serde(default = "default_pixels")]
        pixels: usize,
        #[serde(default = "default_fwhm")]
        fwhm: f64,
        #[serde(default = "default_one")]
        group: usize,
        #[serde(default = "default_oversampling")]
        oversampling: usize,
        #[serde(default = "default_padding")]
        padding: usize,
        #[serde(default)]
        noise: f64,
    },
    Sphere {
        n: usize,
        #[serde(default)]
        noise: f64,
    },
}

impl LandscapeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            LandscapeConfig::Ellipse { .. } => "ellipse",
            LandscapeConfig::Rankdef { .. } => "rankdef",
            LandscapeConfig::Shg { .. } => "shg",
            LandscapeConfig::Sphere { .. } => "sphere",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            LandscapeConfig::Ellipse { n, .. }
            | LandscapeConfig::Rankdef { n, .. }
            | LandscapeConfig::Sphere { n, .. } => n,
            LandscapeConfig::Shg { pixels, group, .. } => pixels / group.max(1),
        }
    }

    pub fn rank_class(&self) -> RankClass {
        match self {
            LandscapeConfig::Rankdef { .. } => RankClass::RankDeficient,
            _ => RankClass::FullRank,
        }
    }

    /// Same landscape with dimension (pixel count for `shg`) replaced.
    pub fn with_dim(mut self, dim: usize) -> Self {
        match &mut self {
            LandscapeConfig::Ellipse { n, .. }
            | LandscapeConfig::Rankdef { n, .. }
            | LandscapeConfig::Sphere { n, .. } => *n = dim,
            LandscapeConfig::Shg { pixels, group, .. } => *pixels = dim * *group,
        }
        self
    }

    pub fn with_noise(mut self, eps: f64) -> Self {
        match &mut self {
            LandscapeConfig::Ellipse { noise, .. }
            | LandscapeConfig::Rankdef { noise, .. }
            | LandscapeConfig::Shg { noise, .. }
            | LandscapeConfig::Sphere { noise, .. } => *noise = eps,
        }
        self
    }

    /// Rank-deficient curvatures as they will be built.
    pub fn rankdef_spectrum(
        rank: usize,
        spectrum: &Option<Vec<f64>>,
        span_decades: f64,
    ) -> Vec<f64> {
        match spectrum {
            Some(s) => s.clone(),
            None if rank <= 1 => vec![1.0; rank],
            None => (0..rank)
                .map(|i| 10f64.powf(-span_decades * i as f64 / (rank - 1) as f64))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<usize>,
    /// Recombination weights; their length fixes `μ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchoverConfig {
    Immediate,
    SigmaBelow(f64),
    Generation(u64),
}

impl Default for SwitchoverConfig {
    fn default() -> Self {
        SwitchoverConfig::SigmaBelow(DEFAULT_SWITCH_SIGMA)
    }
}

impl From<SwitchoverConfig> for Switchover {
    fn from(s: SwitchoverConfig) -> Self {
        match s {
            SwitchoverConfig::Immediate => Switchover::Immediate,
            SwitchoverConfig::SigmaBelow(t) => Switchover::SigmaBelow(t),
            SwitchoverConfig::Generation(g) => Switchover::GenerationAt(g),
        }
    }
}

impl std::str::FromStr for SwitchoverConfig {
    type Err = String;

    /// `immediate`, `sigma-below:<value>` or `generation:<g>`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
        match (head, arg) {
            ("immediate", None) => Ok(SwitchoverConfig::Immediate),
            ("sigma-below", Some(a)) => a
                .parse()
                .map(SwitchoverConfig::SigmaBelow)
                .map_err(|e| format!("{e}")),
            ("generation", Some(a)) => a
                .parse()
                .map(SwitchoverConfig::Generation)
                .map_err(|e| format!("{e}")),
            _ => Err(format!(
                "unknown switchover `{s}` (expected immediate, sigma-below:<σ> or generation:<g>)"
            )),
        }
    }
}

fn default_sigma0() -> f64 {
    DEFAULT_SIGMA0
}
fn default_tikhonov() -> f64 {
    DEFAULT_TIKHONOV
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocalSection {
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    /// Recommended-table value for the landscape's rank class when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_cov: Option<f64>,
    #[serde(default = "default_tikhonov")]
    pub tikhonov: f64,
    #[serde(default)]
    pub switchover: SwitchoverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_class: Option<RankClass>,
}

impl Default for FocalSection {
    fn default() -> Self {
        Self {
            sigma0: DEFAULT_SIGMA0,
            alpha: None,
            c_cov: None,
            tikhonov: DEFAULT_TIKHONOV,
            switchover: SwitchoverConfig::default(),
            rank_class: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedStart {
    Optimum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartPoint {
    Named(NamedStart),
    Uniform(f64),
    Vector(Vec<f64>),
}

impl Default for StartPoint {
    fn default() -> Self {
        StartPoint::Named(NamedStart::Optimum)
    }
}

impl std::str::FromStr for StartPoint {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "optimum" {
            return Ok(StartPoint::Named(NamedStart::Optimum));
        }
        if s.contains(',') {
            return s
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(StartPoint::Vector)
                .map_err(|e| e.to_string());
        }
        s.parse()
            .map(StartPoint::Uniform)
            .map_err(|e| format!("start point `{s}`: {e}"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub mean: StartPoint,
    /// Defaults to `focal.sigma0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WrapMode {
    #[default]
    None,
    Wrap,
    Reject,
}

fn default_period() -> f64 {
    TAU
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrapSection {
    #[serde(default)]
    pub mode: WrapMode,
    #[serde(default = "default_period")]
    pub period: f64,
}

impl Default for WrapSection {
    fn default() -> Self {
        Self {
            mode: WrapMode::None,
            period: TAU,
        }
    }
}

impl WrapSection {
    pub fn policy(&self) -> WrapPolicy {
        match self.mode {
            WrapMode::None => WrapPolicy::Unbounded,
            WrapMode::Wrap => WrapPolicy::Wrap {
                period: self.period,
            },
            WrapMode::Reject => WrapPolicy::Reject {
                period: self.period,
            },
        }
    }
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub kernel: Kernel,
    #[serde(default)]
    pub mechanism: Mechanism,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub landscape: LandscapeConfig,
    #[serde(default)]
    pub strategy: StrategySection,
    #[serde(default)]
    pub focal: FocalSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub wrap: WrapSection,
}

impl ExperimentConfig {
    pub fn new(
        landscape: LandscapeConfig,
        kernel: Kernel,
        mechanism: Mechanism,
        seed: u64,
    ) -> Self {
        Self {
            seed,
            budget: DEFAULT_BUDGET,
            kernel,
            mechanism,
            output: None,
            landscape,
            strategy: StrategySection::default(),
            focal: FocalSection::default(),
            initial: InitialSection::default(),
            wrap: WrapSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        toml::from_str(&text).map_err(|e| crate::HarnessError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Fills population, recommended-table and step-size defaults so the config states
    /// every value the run will use.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        let n = c.landscape.dim();
        if n == 0 {
            return Err(config_error("landscape dimension must be positive"));
        }
        let base = self.base_strategy(n)?;
        if c.strategy.weights.is_none() {
            c.strategy.lambda = Some(base.lambda);
            c.strategy.mu = Some(base.mu);
        }
        let class = c
            .focal
            .rank_class
            .unwrap_or_else(|| c.landscape.rank_class());
        c.focal.rank_class = Some(class);
        if c.focal.alpha.is_none() || c.focal.c_cov.is_none() {
            let t = defaults_from_table1(n, class);
            c.focal.alpha.get_or_insert(t.alpha);
            c.focal.c_cov.get_or_insert(t.c_cov);
        }
        if c.initial.sigma.is_none() {
            c.initial.sigma = Some(c.focal.sigma0);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.landscape.dim();
        let cfg = self.strategy_config()?;
        if self.budget < cfg.lambda as u64 {
            return Err(config_error(format!(
                "budget {} is smaller than one generation (λ = {})",
                self.budget, cfg.lambda
            )));
        }
        if let StartPoint::Vector(v) = &self.initial.mean {
            if v.len() != n {
                return Err(config_error(format!(
                    "initial mean has {} entries, landscape has {n}",
                    v.len()
                )));
            }
        }
        if let Some(s) = self.initial.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(config_error("initial sigma must be positive"));
            }
        }
        if !(self.wrap.period > 0.0 && self.wrap.period.is_finite()) {
            return Err(config_error("wrap period must be positive"));
        }
        if self.mechanism == Mechanism::Focal {
            self.focal_config()?.validate()?;
        }
        Ok(())
    }

    fn base_strategy(&self, n: usize) -> Result<StrategyConfig> {
        let s = &self.strategy;
        let cfg = match (&s.weights, s.lambda) {
            (Some(w), Some(lambda)) => StrategyConfig::from_weights(n, lambda, w.clone())?,
            (Some(_), None) => return Err(config_error("strategy.weights needs strategy.lambda")),
            (None, Some(lambda)) => {
                StrategyConfig::with_population(n, lambda, s.mu.unwrap_or(lambda / 2))?
            }
            (None, None) if s.mu.is_some() => {
                return Err(config_error("strategy.mu needs strategy.lambda"))
            }
            (None, None) => StrategyConfig::default_for(n),
        };
        Ok(cfg)
    }

    /// Strategy constants with the kernel's default `c_cov`.
    pub fn strategy_config(&self) -> Result<StrategyConfig> {
        Ok(self
            .base_strategy(self.landscape.dim())?
            .with_regime_default(self.kernel.regime()))
    }

    pub fn focal_config(&self) -> Result<FocalConfig> {
        let n = self.landscape.dim();
        let (alpha, c_cov) = match (self.focal.alpha, self.focal.c_cov) {
            (Some(a), Some(c)) => (a, c),
            (a, c) => {
                let class = self
                    .focal
                    .rank_class
                    .unwrap_or_else(|| self.landscape.rank_class());
                let t = defaults_from_table1(n, class);
                (a.unwrap_or(t.alpha), c.unwrap_or(t.c_cov))
            }
        };
        Ok(FocalConfig::new(self.focal.sigma0, alpha, c_cov)
            .with_tikhonov(self.focal.tikhonov)
            .with_switchover(self.focal.switchover.into()))
    }

    pub fn control(&self) -> Result<StepSizeControl> {
        Ok(match self.mechanism {
            Mechanism::Csa => StepSizeControl::Csa,
            Mechanism::Focal => StepSizeControl::Focal(self.focal_config()?),
        })
    }

    pub fn run_settings(&self, optimum: Option<Vec<f64>>) -> Result<RunSettings> {
        let n = self.landscape.dim();
        let initial_mean = match &self.initial.mean {
            StartPoint::Named(NamedStart::Optimum) => optimum.ok_or_else(|| {
                config_error("landscape has no known optimum; give initial.mean explicitly")
            })?,
            StartPoint::Uniform(v) => vec![*v; n],
            StartPoint::Vector(v) => v.clone(),
        };
        Ok(RunSettings {
            budget: self.budget,
            seed: self.seed,
            initial_mean,
            initial_sigma: self.initial.sigma.unwrap_or(self.focal.sigma0),
            regime: self.kernel.regime(),
            wrap: self.wrap.policy(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_resolves_table1_defaults() {
        let text = r#"
            seed = 3
            kernel = "def-cma"
            mechanism = "focal"
            [landscape]
            name = "ellipse"
            n = 80
        "#;
        let c = ExperimentConfig::from_toml(text)
            .unwrap()
            .resolved()
            .unwrap();
        assert_eq!(c.budget, DEFAULT_BUDGET);
        assert_eq!((c.focal.c_cov, c.focal.alpha), (Some(0.04), Some(0.10)));
        assert_eq!(c.strategy.lambda, Some(17));
        assert_eq!(c.initial.sigma, Some(DEFAULT_SIGMA0));
    }

    #[test]
    fn seed_is_mandatory() {
        let text =
            "kernel = \"def-cma\"\nmechanism = \"csa\"\n[landscape]\nname = \"sphere\"\nn = 4\n";
        assert!(ExperimentConfig::from_toml(text).is_err());
    }

    #[test]
    fn switchover_strings() {
        assert_eq!(
            "immediate".parse::<SwitchoverConfig>(),
            Ok(SwitchoverConfig::Immediate)
        );
        assert_eq!(
            "sigma-below:1e-4".parse::<SwitchoverConfig>(),
            Ok(SwitchoverConfig::SigmaBelow(1e-4))
        );
        assert_eq!(
            "generation:12".parse::<SwitchoverConfig>(),
            Ok(SwitchoverConfig::Generation(12))
        );
        assert!("sometimes".parse::<SwitchoverConfig>().is_err());
    }

    #[test]
    fn budget_below_one_generation_is_rejected() {
        let mut c = ExperimentConfig::new(
            LandscapeConfig::Sphere { n: 10, noise: 0.0 },
            Kernel::DefCma,
            Mechanism::Csa,
            0,
        );
        c.budget = 5;
        assert!(c.resolved().is_err());
    }

    #[test]
    fn rankdef_default_spectrum_spans_requested_decades() {
        let s = LandscapeConfig::rankdef_spectrum(6, &None, 0.5);
        assert_eq!(s.len(), 6);
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[5].log10() + 0.5).abs() < 1e-12);
    }
}
