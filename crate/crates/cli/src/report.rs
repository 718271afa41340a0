use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

/// Cross-checks of one tester run against the dense oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCrossCheck {
    /// Exact graph conductance, when small enough to enumerate.
    pub conductance: Option<f64>,
    /// Max `|Ŵ − W^ℓ|` over all sources and vertices.
    pub max_estimate_error: Option<f64>,
    /// Max `|s_v − ‖W^ℓ e_v − π‖²|` over sources.
    pub max_s_error: Option<f64>,
}

/// One line of a test report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub schema_version: u32,
    pub graph: String,
    pub n: usize,
    pub m: usize,
    pub mode: String,
    pub phi: f64,
    pub eps: f64,
    pub rep: usize,
    pub seed: u64,
    /// `"accept"` or `"reject"`.
    pub verdict: String,
    pub reject_reason: Option<String>,
    pub rounds: usize,
    pub congestion_bits: usize,
    pub budget_bits: Option<usize>,
    pub violations: usize,
    pub sample_size: usize,
    /// `ln s_v` per source; `null` for an exact zero.
    pub log_s: Vec<Option<f64>>,
    pub oracle: Option<OracleCrossCheck>,
    pub wall_ms: f64,
}

impl ReportRecord {
    pub fn accepted(&self) -> bool {
        self.verdict == "accept"
    }

    /// The record with timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> ReportRecord {
        ReportRecord { wall_ms: 0.0, ..self.clone() }
    }
}

pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut w: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>, R: BufRead>(r: R) -> Result<Vec<T>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| HarnessError::Report(format!("line {}: {e}", i + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| HarnessError::Report(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Rates and extremes over a batch of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub accept_rate: f64,
    pub max_rounds: usize,
    pub mean_rounds: f64,
    pub max_congestion_bits: usize,
    pub violations: usize,
    /// `(reason, count)` in reason order.
    pub reasons: Vec<(String, usize)>,
}

pub fn summarize(records: &[ReportRecord]) -> Summary {
    let runs = records.len();
    let accepted = records.iter().filter(|r| r.accepted()).count();
    let mut reasons = std::collections::BTreeMap::new();
    for r in records {
        if let Some(reason) = &r.reject_reason {
            *reasons.entry(reason.clone()).or_insert(0) += 1;
        }
    }
    Summary {
        runs,
        accept_rate: if runs == 0 { 0.0 } else { accepted as f64 / runs as f64 },
        max_rounds: records.iter().map(|r| r.rounds).max().unwrap_or(0),
        mean_rounds: if runs == 0 { 0.0 } else { records.iter().map(|r| r.rounds as f64).sum::<f64>() / runs as f64 },
        max_congestion_bits: records.iter().map(|r| r.congestion_bits).max().unwrap_or(0),
        violations: records.iter().map(|r| r.violations).sum(),
        reasons: reasons.into_iter().collect(),
    }
}
