//! Post-run metrics over recovered spectra and run traces.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::focal::{Phase, PracticalStepRecord, RunTrace};
use crate::landscape::{Landscape, Orientation};
use crate::linalg::{dot, Matrix, SymmetricEigen};
use crate::rng::search_rng;
use crate::stats;
use crate::{invalid, Error, Result};

pub const DEFAULT_GAP_DECADES: f64 = 2.0;
pub const BOUND_SLACK: f64 = 0.05;
const LOG_FLOOR: f64 = 1e-300;

/// Sign convention of a reference spectrum. Maximisation spectra are negated
/// before comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignConvention {
    Minimize,
    Maximize,
}

impl From<Orientation> for SignConvention {
    fn from(o: Orientation) -> Self {
        match o {
            Orientation::Minimize => SignConvention::Minimize,
            Orientation::Maximize => SignConvention::Maximize,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonOptions {
    pub gap_decades: f64,
    /// Compare only the leading `k` eigenvalues.
    pub leading: Option<usize>,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            gap_decades: DEFAULT_GAP_DECADES,
            leading: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumComparison {
    /// Sorted nonincreasing by magnitude.
    pub recovered: Vec<f64>,
    pub reference: Vec<f64>,
    pub ratios: Vec<f64>,
    /// RMS of `log₁₀ |h_rec| − log₁₀ |h_ref|` over the compared indices.
    pub log_rms_error: f64,
    pub compared: usize,
    pub rank_estimate: usize,
    pub reference_rank: usize,
}

fn sort_by_magnitude(v: &mut [f64]) {
    v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
}

fn log_mag(v: f64) -> f64 {
    v.abs().max(LOG_FLOOR).log10()
}

/// Index after the largest consecutive log-gap if it spans at least
/// `gap_decades`, otherwise the full length.
pub fn rank_estimate(spectrum: &[f64], gap_decades: f64) -> usize {
    let mut v = spectrum.to_vec();
    sort_by_magnitude(&mut v);
    let mut best = (0.0, v.len());
    for i in 1..v.len() {
        let gap = log_mag(v[i - 1]) - log_mag(v[i]);
        if gap > best.0 {
            best = (gap, i);
        }
    }
    if best.0 >= gap_decades {
        best.1
    } else {
        v.len()
    }
}

/// Largest consecutive log-gap (decades) directly after index `k` (1-based
/// count of leading eigenvalues).
pub fn gap_after(spectrum: &[f64], k: usize) -> f64 {
    let mut v = spectrum.to_vec();
    sort_by_magnitude(&mut v);
    if k == 0 || k >= v.len() {
        return 0.0;
    }
    log_mag(v[k - 1]) - log_mag(v[k])
}

pub fn compare_spectra(
    recovered: &[f64],
    reference: &[f64],
    convention: SignConvention,
) -> Result<SpectrumComparison> {
    compare_spectra_with(
        recovered,
        reference,
        convention,
        &ComparisonOptions::default(),
    )
}

pub fn compare_spectra_with(
    recovered: &[f64],
    reference: &[f64],
    convention: SignConvention,
    options: &ComparisonOptions,
) -> Result<SpectrumComparison> {
    if recovered.len() != reference.len() {
        return Err(Error::Contract("spectra must have equal length"));
    }
    if recovered.is_empty() {
        return Err(Error::Contract("spectra must be non-empty"));
    }
    let mut rec = recovered.to_vec();
    let mut refs: Vec<f64> = match convention {
        SignConvention::Minimize => reference.to_vec(),
        SignConvention::Maximize => reference.iter().map(|v| -v).collect(),
    };
    sort_by_magnitude(&mut rec);
    sort_by_magnitude(&mut refs);
    let reference_rank = rank_estimate(&refs, options.gap_decades);
    let compared = options
        .leading
        .map_or(reference_rank, |k| k.min(reference_rank))
        .max(1);
    let sq: f64 = (0..compared)
        .map(|i| (log_mag(rec[i]) - log_mag(refs[i])).powi(2))
        .sum();
    Ok(SpectrumComparison {
        ratios: rec.iter().zip(&refs).map(|(a, b)| a / b).collect(),
        log_rms_error: (sq / compared as f64).sqrt(),
        compared,
        rank_estimate: rank_estimate(&rec, options.gap_decades),
        reference_rank,
        recovered: rec,
        reference: refs,
    })
}

/// Modified Gram-Schmidt; drops numerically dependent vectors.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let p = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
        }
        let nrm = crate::linalg::norm(&w);
        if nrm > 1e-12 * crate::linalg::norm(v).max(f64::MIN_POSITIVE) {
            w.iter_mut().for_each(|a| *a /= nrm);
            out.push(w);
        }
    }
    out
}

/// Principal angles (radians, ascending) between the spans of `a` and `b`.
pub fn principal_angles(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<f64>> {
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    if qa.is_empty() || qb.is_empty() {
        return Err(Error::Contract("subspaces must be non-trivial"));
    }
    if qa[0].len() != qb[0].len() {
        return Err(Error::DimensionMismatch {
            expected: qa[0].len(),
            found: qb[0].len(),
        });
    }
    let (small, large) = if qa.len() <= qb.len() {
        (&qa, &qb)
    } else {
        (&qb, &qa)
    };
    let k = small.len();
    // Gram matrix of the projections of `small` onto `large`
    let m: Vec<Vec<f64>> = small
        .iter()
        .map(|s| large.iter().map(|l| dot(s, l)).collect())
        .collect();
    let g = Matrix::from_fn(k, |i, j| dot(&m[i], &m[j]));
    let eig = SymmetricEigen::new(&g)?;
    let mut angles: Vec<f64> = eig
        .values
        .iter()
        .map(|&s2| s2.max(0.0).sqrt().min(1.0).acos())
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum FitWindow {
    All,
    #[default]
    FocalPhase,
    /// Inclusive generation range.
    Generations(u64, u64),
    /// From the switchover to the first generation where `𝓛` has covered
    /// `fraction` of its total rise within the learning phase.
    FocalGrowth {
        fraction: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearningRateFit {
    /// Decades of `√cond` per generation.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub first_generation: u64,
    pub last_generation: u64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 10;

/// `𝓛(g) = log₁₀ √cond(C^(g))`.
pub fn learning_value(cond: f64) -> f64 {
    0.5 * cond.log10()
}

pub fn fit_learning_rate(trace: &RunTrace, window: FitWindow) -> Result<LearningRateFit> {
    let rows: Vec<(u64, f64)> = match window {
        FitWindow::All => trace
            .rows
            .iter()
            .map(|r| (r.generation, learning_value(r.step.cond)))
            .collect(),
        FitWindow::FocalPhase => trace
            .rows
            .iter()
            .filter(|r| r.phase == Phase::Learn)
            .map(|r| (r.generation, learning_value(r.step.cond)))
            .collect(),
        FitWindow::Generations(a, b) => trace
            .rows
            .iter()
            .filter(|r| r.generation >= a && r.generation <= b)
            .map(|r| (r.generation, learning_value(r.step.cond)))
            .collect(),
        FitWindow::FocalGrowth { fraction } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(invalid("growth fraction must lie in (0, 1]"));
            }
            let learn: Vec<(u64, f64)> = trace
                .rows
                .iter()
                .filter(|r| r.phase == Phase::Learn)
                .map(|r| (r.generation, learning_value(r.step.cond)))
                .collect();
            match learn.first() {
                None => Vec::new(),
                Some(&(_, start)) => {
                    let peak = learn.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
                    let target = start + fraction * (peak - start);
                    let end = learn
                        .iter()
                        .position(|p| p.1 >= target)
                        .unwrap_or(learn.len() - 1);
                    learn[..=end].to_vec()
                }
            }
        }
    };
    if rows.len() < MIN_FIT_POINTS {
        return Err(Error::Contract(
            "learning-rate window needs at least 10 generations",
        ));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fit =
        stats::fit_line(&xs, &ys).ok_or(Error::Contract("degenerate learning-rate window"))?;
    Ok(LearningRateFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        first_generation: rows[0].0,
        last_generation: rows[rows.len() - 1].0,
        points: rows.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepAudit {
    pub checked: usize,
    pub violations: usize,
    pub violating_generations: Vec<u64>,
    pub median_proximity: f64,
    pub mean_proximity: f64,
}

/// Checks `0.95·lower ≤ δ_p(μ_eff=1) ≤ 1.05·upper` for each record.
pub fn audit_records(records: &[PracticalStepRecord]) -> StepAudit {
    let mut violating_generations = Vec::new();
    let mut prox = Vec::with_capacity(records.len());
    for r in records {
        let ok = r.lower <= r.upper
            && r.delta_p_unit >= r.lower * (1.0 - BOUND_SLACK)
            && r.delta_p_unit <= r.upper * (1.0 + BOUND_SLACK);
        if !ok {
            violating_generations.push(r.generation);
        }
        prox.push(r.proximity());
    }
    StepAudit {
        checked: records.len(),
        violations: violating_generations.len(),
        violating_generations,
        median_proximity: stats::median(&prox).unwrap_or(0.0),
        mean_proximity: if prox.is_empty() {
            0.0
        } else {
            prox.iter().sum::<f64>() / prox.len() as f64
        },
    }
}

/// Audits the forced-control generations, or every generation of a trace
/// that never switched.
pub fn audit_practical_steps(trace: &RunTrace) -> StepAudit {
    let learning: Vec<PracticalStepRecord> = trace.learning_rows().map(|r| r.step).collect();
    if learning.is_empty() {
        audit_records(&trace.rows.iter().map(|r| r.step).collect::<Vec<_>>())
    } else {
        audit_records(&learning)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeSelection {
    /// Keep the best `μ` of each `λ`.
    Ranked,
    /// Keep the first `μ` drawn, ignoring fitness.
    Unselected,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeSettings {
    pub samples: usize,
    pub sigma: f64,
    pub lambda: usize,
    pub mu: usize,
    pub selection: ProbeSelection,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialFitReport {
    pub rate: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub samples: usize,
}

/// Samples `λ` points `x* + σ z` around the optimum, keeps `μ` according to
/// `selection`, and tests the kept `J = f(x) − f(x*)` against the
/// maximum-likelihood exponential.
pub fn probe_selection_pdf(
    landscape: &dyn Landscape,
    settings: &ProbeSettings,
) -> Result<ExponentialFitReport> {
    let optimum = landscape
        .optimum()
        .ok_or(Error::Contract("landscape has no known optimum"))?;
    if settings.mu == 0 || settings.mu > settings.lambda || settings.samples == 0 {
        return Err(invalid(
            "probe needs 1 <= mu <= lambda and a positive sample count",
        ));
    }
    if !(settings.sigma > 0.0) {
        return Err(invalid("probe step-size must be positive"));
    }
    let orientation = landscape.orientation();
    let f_star = orientation.to_minimization(landscape.value(&optimum));
    let mut rng = search_rng(settings.seed);
    let mut kept = Vec::with_capacity(settings.samples);
    let mut batch = vec![0.0; settings.lambda];
    while kept.len() < settings.samples {
        for j in batch.iter_mut() {
            let x: Vec<f64> = optimum
                .iter()
                .map(|&o| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    o + settings.sigma * z
                })
                .collect();
            *j = orientation.to_minimization(landscape.value(&x)) - f_star;
        }
        if settings.selection == ProbeSelection::Ranked {
            batch.sort_by(f64::total_cmp);
        }
        let take = settings.mu.min(settings.samples - kept.len());
        kept.extend_from_slice(&batch[..take]);
    }
    let rate = stats::exponential_rate(&kept);
    let d = stats::ks_statistic(&kept, |x| 1.0 - (-rate * x.max(0.0)).exp());
    Ok(ExponentialFitReport {
        rate,
        ks_statistic: d,
        p_value: stats::ks_p_value(d, kept.len()),
        samples: kept.len(),
    })
}

/// Central finite-difference Hessian with step `h`.
pub fn finite_difference_hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Matrix {
    let n = x.len();
    let f0 = f(x);
    let mut p = x.to_vec();
    let mut out = Matrix::zeros(n);
    for i in 0..n {
        p[i] = x[i] + h;
        let fp = f(&p);
        p[i] = x[i] - h;
        let fm = f(&p);
        p[i] = x[i];
        out[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut eval = |si: f64, sj: f64| {
                p[i] = x[i] + si * h;
                p[j] = x[j] + sj * h;
                let v = f(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
