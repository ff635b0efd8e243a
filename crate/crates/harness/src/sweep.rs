//! Seed and parameter grids over a base config, run in parallel with one
//! output directory per point.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::experiment::{run_experiment, ExperimentReport};
use crate::io::fmt_f64;
use crate::{config_error, io_error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepGrid {
    pub seeds: Vec<u64>,
    /// Empty axes keep the base value.
    pub c_cov: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma0: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub seed: u64,
    pub c_cov: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma0: Option<f64>,
}

impl SweepPoint {
    pub fn label(&self) -> String {
        let mut s = format!("seed{}", self.seed);
        for (name, v) in [
            ("ccov", self.c_cov),
            ("alpha", self.alpha),
            ("sigma", self.sigma0),
        ] {
            if let Some(v) = v {
                let _ = write!(s, "_{name}{v}");
            }
        }
        s
    }

    pub fn apply(&self, base: &ExperimentConfig, root: &Path) -> ExperimentConfig {
        let mut c = base.clone();
        c.seed = self.seed;
        if let Some(v) = self.c_cov {
            c.focal.c_cov = Some(v);
        }
        if let Some(v) = self.alpha {
            c.focal.alpha = Some(v);
        }
        if let Some(v) = self.sigma0 {
            c.focal.sigma0 = v;
            c.initial.sigma = None;
        }
        c.output = Some(root.join(self.label()));
        c
    }
}

fn axis(values: &[f64]) -> Vec<Option<f64>> {
    if values.is_empty() {
        vec![None]
    } else {
        values.iter().copied().map(Some).collect()
    }
}

impl SweepGrid {
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &seed in &self.seeds {
            for c_cov in axis(&self.c_cov) {
                for alpha in axis(&self.alpha) {
                    for sigma0 in axis(&self.sigma0) {
                        out.push(SweepPoint {
                            seed,
                            c_cov,
                            alpha,
                            sigma0,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub point: SweepPoint,
    pub directory: PathBuf,
    pub result: Result<ExperimentReport>,
}

/// Runs every grid point on the rayon pool and writes `sweep.csv` into `root`.
pub fn run_sweep(
    base: &ExperimentConfig,
    grid: &SweepGrid,
    root: &Path,
) -> Result<Vec<SweepOutcome>> {
    if grid.seeds.is_empty() {
        return Err(config_error("sweep needs at least one seed"));
    }
    fs::create_dir_all(root).map_err(io_error(root))?;
    let outcomes: Vec<SweepOutcome> = grid
        .points()
        .into_par_iter()
        .map(|point| {
            let cfg = point.apply(base, root);
            let directory = cfg.output.clone().unwrap_or_default();
            let result = run_experiment(&cfg);
            SweepOutcome {
                point,
                directory,
                result,
            }
        })
        .collect();
    let summary = root.join("sweep.csv");
    fs::write(&summary, render_summary(&outcomes)).map_err(io_error(&summary))?;
    Ok(outcomes)
}

pub fn render_summary(outcomes: &[SweepOutcome]) -> String {
    let mut out = String::from(
        "label,seed,status,log_rms_error,r_squared,violations,median_proximity,trace_checksum\n",
    );
    for o in outcomes {
        let _ = match &o.result {
            Ok(r) => writeln!(
                out,
                "{},{},ok,{},{},{},{},{}",
                o.point.label(),
                o.point.seed,
                r.spectrum
                    .as_ref()
                    .map_or(String::new(), |s| fmt_f64(s.log_rms_error)),
                r.learning
                    .as_ref()
                    .map_or(String::new(), |l| fmt_f64(l.r_squared)),
                r.steps.violations,
                fmt_f64(r.steps.median_proximity),
                r.trace_checksum
            ),
            Err(e) => writeln!(
                out,
                "{},{},\"error: {}\",,,,,",
                o.point.label(),
                o.point.seed,
                e.to_string().replace('"', "'")
            ),
        };
    }
    out
}

/// Parses `a..b` (half-open) or a comma list.
pub fn parse_seeds(s: &str) -> std::result::Result<Vec<u64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .map_err(|e| format!("seed range `{s}`: {e}"))?;
        let b: u64 = b
            .trim()
            .parse()
            .map_err(|e| format!("seed range `{s}`: {e}"))?;
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u64>()
                .map_err(|e| format!("seed `{v}`: {e}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn grid_is_a_cartesian_product() {
        let g = SweepGrid {
            seeds: vec![1, 2],
            c_cov: vec![0.02, 0.04, 0.06],
            alpha: vec![],
            sigma0: vec![0.1, 0.2],
        };
        let pts = g.points();
        assert_eq!(pts.len(), 12);
        assert!(pts.iter().all(|p| p.alpha.is_none()));
        assert_eq!(pts[0].label(), "seed1_ccov0.02_sigma0.1");
    }
}
