//! Serialization of run outputs: manifests, JSON documents and CSV tables.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::estimators::FringePoint;
use crate::experiment::{ExperimentConfig, SweepRow};

pub const SWEEP_HEADER: [&str; 13] = [
    "power_mW",
    "lambda",
    "gsi_model",
    "gsi_est",
    "gsi_sigma",
    "p10",
    "p10_sigma",
    "p01",
    "p01_sigma",
    "p11_xcorr",
    "p11_theory",
    "C_bound",
    "C_sigma",
];

pub const FRINGE_HEADER: [&str; 3] = ["phase_rad", "counts_det1", "counts_det2"];

/// Formats `x` with 9 significant digits, `.` as decimal separator and no
/// digit grouping. Moderate magnitudes are written positionally, others in
/// exponent notation.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    if x == 0.0 {
        return "0".to_owned();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci.rsplit_once('e').map_or(0, |(_, e)| e.parse().unwrap_or(0));
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}"))
    } else {
        let (mantissa, e) = sci.split_once('e').unwrap_or((&sci, "0"));
        format!("{}e{e}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s.to_owned()
    }
}

/// Value of `x` after a round trip through [`format_number`].
pub fn round_to_written(x: f64) -> f64 {
    format_number(x).parse().unwrap_or(f64::NAN)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = SWEEP_HEADER.join(",");
    out.push('\n');
    for r in rows {
        let fields = [
            r.power_mw,
            r.lambda,
            r.gsi_model,
            r.gsi_est.value,
            r.gsi_est.sigma,
            r.p10.value,
            r.p10.sigma,
            r.p01.value,
            r.p01.sigma,
            r.p11_xcorr.value,
            r.p11_theory,
            r.c_bound.value,
            r.c_bound.sigma,
        ];
        out.push_str(&fields.map(format_number).join(","));
        out.push('\n');
    }
    out
}

pub fn fringe_csv(points: &[FringePoint]) -> String {
    let mut out = FRINGE_HEADER.join(",");
    out.push('\n');
    for p in points {
        out.push_str(&[p.phase, p.counts[0], p.counts[1]].map(format_number).join(","));
        out.push('\n');
    }
    out
}

/// Parses a numeric CSV table, checking the header.
pub fn parse_csv(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut lines = text.lines();
    let first = lines.next().unwrap_or_default();
    if first.split(',').ne(header.iter().copied()) {
        return Err(CliError::Validation(format!("unexpected CSV header: {first}")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| CliError::Validation(format!("line {}: {f:?}: {e}", i + 2)))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// SHA-256 of the canonical JSON encoding of the resolved configuration.
    pub config_digest: String,
    pub seed: u64,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub command_line: Vec<String>,
}

/// Canonical encoding: struct field order, shortest round-trip floats, no whitespace.
pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_vec(cfg).unwrap_or_default();
    Sha256::digest(&canonical)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig, command_line: Vec<String>) -> Self {
        Self {
            config_digest: config_digest(cfg),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            command_line,
        }
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
