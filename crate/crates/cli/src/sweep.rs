//! Parameter grids over an experiment template.

use serde::{Deserialize, Serialize};

use crate::experiment::run_experiment;
use crate::report::summarize;
use crate::spec::ExperimentSpec;
use crate::HarnessError;

/// One axis: a key and its values. The key `n` is substituted for `{n}` in
/// the graph spec; any other key names a tester field.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl Axis {
    /// Parses `key=v1,v2,...`.
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        let (key, values) = s
            .split_once('=')
            .ok_or_else(|| HarnessError::Spec(format!("axis `{s}` must look like key=v1,v2")))?;
        let values: Vec<String> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
        Ok(Axis { key: key.trim().to_string(), values })
    }
}

/// One grid point's aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub graph: String,
    pub n: usize,
    pub m: usize,
    pub phi: f64,
    pub eps: f64,
    pub reps: usize,
    pub max_rounds: usize,
    pub mean_rounds: f64,
    pub max_congestion_bits: usize,
    pub accept_rate: f64,
    /// `ln(n+m) / (ε Φ²)`.
    pub round_scale: f64,
    /// `max_rounds / round_scale`.
    pub round_constant: f64,
    /// Why the cell could not run, if it could not.
    pub error: Option<String>,
}

/// Every combination of axis values, in row-major order (last axis fastest).
pub fn grid_points(axes: &[Axis]) -> Result<Vec<Vec<(String, String)>>, HarnessError> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Err(HarnessError::Spec("sweep grid is empty".into()));
    }
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

pub fn apply_point(template: &ExperimentSpec, point: &[(String, String)]) -> Result<ExperimentSpec, HarnessError> {
    let mut spec = template.clone();
    for (key, value) in point {
        if key == "n" {
            spec.graph = spec.graph.replace("{n}", value);
        } else {
            spec.set_tester_field(key, value)?;
        }
    }
    Ok(spec)
}

/// Runs `template` at every grid point. A cell that fails to build or run
/// is recorded with its error instead of aborting the sweep.
pub fn run_sweep(template: &ExperimentSpec, axes: &[Axis]) -> Result<Vec<SweepCell>, HarnessError> {
    let points = grid_points(axes)?;
    let mut cells = Vec::with_capacity(points.len());
    for point in points {
        let spec = apply_point(template, &point);
        let mut cell = SweepCell {
            graph: spec.as_ref().map_or_else(|_| template.graph.clone(), |s| s.graph.clone()),
            n: 0,
            m: 0,
            phi: spec.as_ref().map_or(f64::NAN, |s| s.tester.phi),
            eps: spec.as_ref().map_or(f64::NAN, |s| s.tester.eps),
            reps: template.reps,
            max_rounds: 0,
            mean_rounds: 0.0,
            max_congestion_bits: 0,
            accept_rate: 0.0,
            round_scale: 0.0,
            round_constant: 0.0,
            error: None,
        };
        match spec.and_then(|s| run_experiment(&s)) {
            Ok(records) => {
                let sum = summarize(&records);
                let first = &records[0];
                cell.n = first.n;
                cell.m = first.m;
                cell.max_rounds = sum.max_rounds;
                cell.mean_rounds = sum.mean_rounds;
                cell.max_congestion_bits = sum.max_congestion_bits;
                cell.accept_rate = sum.accept_rate;
                cell.round_scale = ((first.n + first.m) as f64).ln() / (cell.eps * cell.phi * cell.phi);
                cell.round_constant = sum.max_rounds as f64 / cell.round_scale;
            }
            Err(e) => cell.error = Some(e.to_string()),
        }
        cells.push(cell);
    }
    Ok(cells)
}

/// Tab-separated table of the cells, with a header row.
pub fn format_table(cells: &[SweepCell]) -> String {
    let mut out = String::from("graph\tn\tm\tphi\teps\treps\tmax_rounds\tmean_rounds\tcongestion\taccept_rate\tround_scale\tK\terror\n");
    for c in cells {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.1}\t{}\t{:.3}\t{:.3}\t{:.3}\t{}\n",
            c.graph,
            c.n,
            c.m,
            c.phi,
            c.eps,
            c.reps,
            c.max_rounds,
            c.mean_rounds,
            c.max_congestion_bits,
            c.accept_rate,
            c.round_scale,
            c.round_constant,
            c.error.as_deref().unwrap_or("-")
        ));
    }
    out
}
