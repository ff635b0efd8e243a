//! Plain-text artifacts: comma-separated traces and spectra behind a
//! `#`-prefixed header block, and row-major matrix files. Floats are written
//! with 17 significant digits so files round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use focal_core::analysis::{
    compare_spectra_with, ComparisonOptions, SignConvention, SpectrumComparison,
};
use focal_core::{HessianEstimate, Matrix, Phase, RunTrace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::{io_error, HarnessError, Result};

pub const ARTIFACT_VERSION: u32 = 1;
const CONFIG_MARKER: &str = "# --- config ---";

pub const TRACE_COLUMNS: [&str; 16] = [
    "generation",
    "evaluations",
    "phase",
    "best_fitness",
    "parent_fitness",
    "sigma",
    "trace_c",
    "cond_c",
    "lambda_min",
    "lambda_max",
    "delta_p",
    "delta_p_unit",
    "lower",
    "upper",
    "empirical_step",
    "rejected",
];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_error(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_error(path))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_error(path))
}

/// Splits leading `#` lines from the body.
fn split_header(text: &str) -> (Vec<&str>, &str) {
    let mut header = Vec::new();
    let mut rest = text;
    while rest.starts_with('#') {
        let end = rest.find('\n').map_or(rest.len(), |i| i + 1);
        header.push(rest[..end].trim_end());
        rest = &rest[end..];
    }
    (header, rest)
}

fn header_value<'a>(header: &[&'a str], key: &str) -> Option<&'a str> {
    header.iter().find_map(|l| {
        let (k, v) = l.trim_start_matches('#').split_once('=')?;
        (k.trim() == key).then(|| v.trim())
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn file_checksum(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(io_error(path))?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub generation: u64,
    pub evaluations: u64,
    pub phase: String,
    pub best_fitness: f64,
    pub parent_fitness: f64,
    pub sigma: f64,
    pub trace_c: f64,
    pub cond_c: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub delta_p: f64,
    pub delta_p_unit: f64,
    pub lower: f64,
    pub upper: f64,
    pub empirical_step: f64,
    pub rejected: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistedTrace {
    pub version: u32,
    pub switch_generation: Option<u64>,
    pub config: ExperimentConfig,
    pub rows: Vec<TraceRecord>,
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Climb => "climb",
        Phase::Learn => "learn",
    }
}

pub fn render_trace(config: &ExperimentConfig, trace: &RunTrace) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# focal-harness trace");
    let _ = writeln!(out, "# artifact_version = {ARTIFACT_VERSION}");
    match trace.switch_generation {
        Some(g) => {
            let _ = writeln!(out, "# switch_generation = {g}");
        }
        None => out.push_str("# switch_generation = none\n"),
    }
    out.push_str(CONFIG_MARKER);
    out.push('\n');
    let echo = ExperimentConfig {
        output: None,
        ..config.clone()
    };
    for line in echo.to_toml()?.lines() {
        let _ = writeln!(out, "# {line}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    for r in &trace.rows {
        let s = &r.step;
        w.write_record([
            r.generation.to_string(),
            r.evaluations.to_string(),
            phase_name(r.phase).to_string(),
            fmt_f64(r.best_fitness),
            fmt_f64(r.parent_fitness),
            fmt_f64(s.sigma),
            fmt_f64(s.trace),
            fmt_f64(s.cond),
            fmt_f64(r.lambda_min),
            fmt_f64(r.lambda_max),
            fmt_f64(s.delta_p),
            fmt_f64(s.delta_p_unit),
            fmt_f64(s.lower),
            fmt_f64(s.upper),
            fmt_f64(s.empirical_step),
            r.rejected.to_string(),
        ])?;
    }
    let body = w
        .into_inner()
        .map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn write_trace(path: &Path, config: &ExperimentConfig, trace: &RunTrace) -> Result<()> {
    write_file(path, &render_trace(config, trace)?)
}

pub fn read_trace(path: &Path) -> Result<PersistedTrace> {
    let text = read_file(path)?;
    let (header, body) = split_header(&text);
    let version = header_value(&header, "artifact_version")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_error(path, "missing artifact_version"))?;
    let switch_generation = match header_value(&header, "switch_generation") {
        Some("none") | None => None,
        Some(v) => Some(
            v.parse()
                .map_err(|_| parse_error(path, "bad switch_generation"))?,
        ),
    };
    let start = header
        .iter()
        .position(|l| *l == CONFIG_MARKER)
        .ok_or_else(|| parse_error(path, "missing config echo"))?;
    let echo: String = header[start + 1..]
        .iter()
        .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')))
        .fold(String::new(), |mut s, l| {
            s.push_str(l);
            s.push('\n');
            s
        });
    let config = ExperimentConfig::from_toml(&echo)
        .map_err(|e| parse_error(path, format!("config echo: {e}")))?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<TraceRecord>, _>>()?;
    Ok(PersistedTrace {
        version,
        switch_generation,
        config,
        rows,
    })
}

pub fn render_matrix(kind: &str, m: &Matrix) -> String {
    let n = m.dim();
    let mut out = format!("# focal-harness matrix\n# artifact_version = {ARTIFACT_VERSION}\n# kind = {kind}\n# dim = {n}\n");
    for i in 0..n {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, kind: &str, m: &Matrix) -> Result<()> {
    write_file(path, &render_matrix(kind, m))
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = read_file(path)?;
    let (header, body) = split_header(&text);
    let n: usize = header_value(&header, "dim")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_error(path, "missing dim header"))?;
    let data = body
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| parse_error(path, format!("`{t}`: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let found = data.len();
    Matrix::from_row_major(n, data)
        .ok_or_else(|| parse_error(path, format!("expected {} entries, found {found}", n * n)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFile {
    pub recovered: Vec<f64>,
    pub reference: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct SpectrumLine {
    #[allow(dead_code)]
    index: usize,
    recovered: f64,
    reference: Option<f64>,
}

fn render_summary(out: &mut String, c: &SpectrumComparison) {
    let _ = writeln!(out, "# log_rms_error = {}", fmt_f64(c.log_rms_error));
    let _ = writeln!(out, "# compared = {}", c.compared);
    let _ = writeln!(out, "# rank_estimate = {}", c.rank_estimate);
    let _ = writeln!(out, "# reference_rank = {}", c.reference_rank);
}

/// Renders the comparison file. Without a reference only the recovered
/// column is written and the summary block is omitted.
pub fn render_spectrum(
    recovered: &[f64],
    comparison: Option<&SpectrumComparison>,
) -> Result<String> {
    let mut out = format!("# focal-harness spectrum\n# artifact_version = {ARTIFACT_VERSION}\n");
    let mut w = csv::Writer::from_writer(Vec::new());
    match comparison {
        None => {
            w.write_record(["index", "recovered"])?;
            for (i, v) in recovered.iter().enumerate() {
                w.write_record([i.to_string(), fmt_f64(*v)])?;
            }
        }
        Some(c) => {
            render_summary(&mut out, c);
            w.write_record(["index", "recovered", "reference", "ratio"])?;
            for i in 0..c.recovered.len() {
                w.write_record([
                    i.to_string(),
                    fmt_f64(c.recovered[i]),
                    fmt_f64(c.reference[i]),
                    fmt_f64(c.ratios[i]),
                ])?;
            }
        }
    }
    let body = w
        .into_inner()
        .map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

/// Writes `estimate`'s spectrum, compared against `reference` when given.
pub fn export_spectrum(
    path: &Path,
    estimate: &HessianEstimate,
    reference: Option<(&[f64], SignConvention)>,
    options: &ComparisonOptions,
) -> Result<Option<SpectrumComparison>> {
    let comparison = match reference {
        Some((r, sign)) => Some(compare_spectra_with(&estimate.spectrum, r, sign, options)?),
        None => None,
    };
    write_file(
        path,
        &render_spectrum(&estimate.spectrum, comparison.as_ref())?,
    )?;
    Ok(comparison)
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumFile> {
    let text = read_file(path)?;
    let (_, body) = split_header(&text);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let lines = reader
        .deserialize()
        .collect::<std::result::Result<Vec<SpectrumLine>, _>>()?;
    let recovered = lines.iter().map(|l| l.recovered).collect();
    let reference = lines
        .iter()
        .map(|l| l.reference)
        .collect::<Option<Vec<f64>>>();
    Ok(SpectrumFile {
        recovered,
        reference: reference.filter(|r| !r.is_empty()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(
                s.split('e')
                    .next()
                    .unwrap()
                    .trim_start_matches('-')
                    .replace('.', "")
                    .len(),
                17
            );
        }
    }

    #[test]
    fn header_split() {
        let (h, body) = split_header("# a = 1\n# b = x y\nc,d\n1,2\n");
        assert_eq!(header_value(&h, "a"), Some("1"));
        assert_eq!(header_value(&h, "b"), Some("x y"));
        assert_eq!(body, "c,d\n1,2\n");
    }

    #[test]
    fn checksum_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
