//! `focal` command line: `run`, `sweep`, `compare` and `table1`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use focal_core::analysis::{
    compare_spectra_with, ComparisonOptions, SignConvention, DEFAULT_GAP_DECADES,
};

use crate::config::{ExperimentConfig, Kernel, Mechanism, StartPoint, SwitchoverConfig, WrapMode};
use crate::io::{self, fmt_f64};
use crate::registry;
use crate::sweep::{parse_seeds, run_sweep, SweepGrid};
use crate::table1::{defaults_from_table1, RankClass, TABLE1};
use crate::{config_error, run_experiment, Result};

#[derive(Debug, Parser)]
#[command(
    name = "focal",
    version,
    about = "Forced covariance adaptation experiments and Hessian recovery"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its artifacts.
    Run(RunArgs),
    /// Run a seed/parameter grid in parallel.
    Sweep(SweepArgs),
    /// Compare two spectrum files.
    Compare(CompareArgs),
    /// Print recommended (c_cov, α) settings.
    Table1(Table1Args),
}

/// Flags mirroring the experiment config; they override values read from
/// `--config`.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ellipse, rankdef, shg or sphere.
    #[arg(long)]
    pub landscape: Option<String>,
    /// Landscape dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Input-noise standard deviation.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<Kernel>,
    #[arg(long, value_enum)]
    pub mechanism: Option<Mechanism>,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub lambda: Option<usize>,
    #[arg(long)]
    pub mu: Option<usize>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "c-cov")]
    pub c_cov: Option<f64>,
    #[arg(long)]
    pub tikhonov: Option<f64>,
    /// immediate, sigma-below:<σ> or generation:<g>.
    #[arg(long)]
    pub switchover: Option<SwitchoverConfig>,
    #[arg(long = "rank-class", value_enum)]
    pub rank_class: Option<RankClass>,
    /// optimum, a scalar, or a comma-separated vector.
    #[arg(long)]
    pub start: Option<StartPoint>,
    #[arg(long = "initial-sigma")]
    pub initial_sigma: Option<f64>,
    #[arg(long, value_enum)]
    pub wrap: Option<WrapMode>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// `a..b` or a comma list.
    #[arg(long, default_value = "0..5")]
    pub seeds: String,
    #[arg(long = "c-cov-grid", value_delimiter = ',')]
    pub c_cov_grid: Vec<f64>,
    #[arg(long = "alpha-grid", value_delimiter = ',')]
    pub alpha_grid: Vec<f64>,
    #[arg(long = "sigma0-grid", value_delimiter = ',')]
    pub sigma0_grid: Vec<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Spectrum file whose `recovered` column is tested.
    pub recovered: PathBuf,
    /// Spectrum file whose `recovered` column is the reference.
    pub reference: PathBuf,
    /// Negate the reference (it came from a maximised landscape).
    #[arg(long)]
    pub maximize: bool,
    #[arg(long = "gap-decades", default_value_t = DEFAULT_GAP_DECADES)]
    pub gap_decades: f64,
    #[arg(long)]
    pub leading: Option<usize>,
    /// Write the comparison file here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "rank-class", value_enum)]
    pub rank_class: Option<RankClass>,
}

impl ConfigArgs {
    pub fn build(&self, seed: u64) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let name = self
                    .landscape
                    .as_deref()
                    .ok_or_else(|| config_error("give --config or --landscape"))?;
                ExperimentConfig::new(
                    registry::default_config(name, self.n)?,
                    Kernel::DefCma,
                    Mechanism::Focal,
                    seed,
                )
            }
        };
        c.seed = seed;
        if let Some(name) = &self.landscape {
            if name != c.landscape.name() {
                c.landscape = registry::default_config(name, Some(c.landscape.dim()))?;
            }
        }
        if let Some(n) = self.n {
            c.landscape = c.landscape.with_dim(n);
        }
        if let Some(eps) = self.noise {
            c.landscape = c.landscape.with_noise(eps);
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+ $(as $wrap:ident)?;)*) => {$(
                if let Some(v) = self.$flag.clone() {
                    c.$($field).+ = set!(@wrap v $(, $wrap)?);
                }
            )*};
            (@wrap $v:ident) => { $v };
            (@wrap $v:ident, Some) => { Some($v) };
        }
        set! {
            kernel => kernel;
            mechanism => mechanism;
            budget => budget;
            lambda => strategy.lambda as Some;
            mu => strategy.mu as Some;
            sigma0 => focal.sigma0;
            alpha => focal.alpha as Some;
            c_cov => focal.c_cov as Some;
            tikhonov => focal.tikhonov;
            switchover => focal.switchover;
            rank_class => focal.rank_class as Some;
            start => initial.mean;
            initial_sigma => initial.sigma as Some;
            wrap => wrap.mode;
        }
        if self.output.is_some() {
            c.output = self.output.clone();
        }
        Ok(c)
    }
}

fn default_dir(root: &str, c: &ExperimentConfig) -> PathBuf {
    Path::new(root).join(format!(
        "{}-{}-{}",
        c.landscape.name(),
        c.kernel.name(),
        c.mechanism.name()
    ))
}

/// Executes a parsed command and returns what it prints.
pub fn dispatch(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Run(args) => {
            let mut c = args.config.build(args.seed)?;
            if c.output.is_none() {
                c.output = Some(default_dir("runs", &c).join(format!("seed{}", c.seed)));
            }
            let report = run_experiment(&c)?;
            let mut out = toml::to_string(&report)?;
            let _ = writeln!(
                out,
                "# artifacts in {}",
                c.output
                    .as_ref()
                    .map_or(String::new(), |p| p.display().to_string())
            );
            Ok(out)
        }
        Command::Sweep(args) => {
            let mut base = args.config.build(0)?;
            let root = base
                .output
                .take()
                .unwrap_or_else(|| default_dir("sweeps", &base));
            let grid = SweepGrid {
                seeds: parse_seeds(&args.seeds).map_err(config_error)?,
                c_cov: args.c_cov_grid,
                alpha: args.alpha_grid,
                sigma0: args.sigma0_grid,
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(args.threads)
                .build()
                .map_err(|e| config_error(e.to_string()))?;
            let outcomes = pool.install(|| run_sweep(&base, &grid, &root))?;
            let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
            for o in outcomes.iter().filter(|o| o.result.is_err()) {
                if let Err(e) = &o.result {
                    log::error!("{}: {e}", o.point.label());
                }
            }
            Ok(format!(
                "{} runs, {failed} failed; summary in {}\n",
                outcomes.len(),
                root.join("sweep.csv").display()
            ))
        }
        Command::Compare(args) => {
            let rec = io::read_spectrum(&args.recovered)?;
            let reference = io::read_spectrum(&args.reference)?;
            let sign = if args.maximize {
                SignConvention::Maximize
            } else {
                SignConvention::Minimize
            };
            let opts = ComparisonOptions {
                gap_decades: args.gap_decades,
                leading: args.leading,
            };
            let cmp = compare_spectra_with(&rec.recovered, &reference.recovered, sign, &opts)?;
            let text = io::render_spectrum(&cmp.recovered, Some(&cmp))?;
            if let Some(path) = &args.output {
                std::fs::write(path, &text).map_err(crate::io_error(path))?;
            }
            Ok(format!(
                "log_rms_error = {}\ncompared = {}\nrank_estimate = {}\nreference_rank = {}\n",
                fmt_f64(cmp.log_rms_error),
                cmp.compared,
                cmp.rank_estimate,
                cmp.reference_rank
            ))
        }
        Command::Table1(args) => {
            let mut out = String::new();
            match args.n {
                Some(n) => {
                    let classes = match args.rank_class {
                        Some(c) => vec![c],
                        None => vec![RankClass::RankDeficient, RankClass::FullRank],
                    };
                    for class in classes {
                        let d = defaults_from_table1(n, class);
                        let _ = writeln!(
                            out,
                            "n={n} {class:?}: c_cov={:.4} alpha={:.4}",
                            d.c_cov, d.alpha
                        );
                    }
                }
                None => {
                    out.push_str("n    rank-deficient (c_cov, alpha)   full-rank (c_cov, alpha)\n");
                    for r in &TABLE1 {
                        let _ = writeln!(
                            out,
                            "{:<4} {:.2}  {:.2}                      {:.2}  {:.2}",
                            r.n,
                            r.rank_deficient.0,
                            r.rank_deficient.1,
                            r.full_rank.0,
                            r.full_rank.1
                        );
                    }
                }
            }
            Ok(out)
        }
    }
}
