use std::time::Instant;

use condtest_core::metrics::{graph_conductance_bruteforce, BRUTE_FORCE_MAX_N};
use condtest_core::protocols::{run_tester, TesterRun, WalkMode};
use condtest_core::spectral::{direct_discrepancy, walk_endpoint_distribution};
use condtest_core::{Error, Graph};
use rayon::prelude::*;

use crate::report::{OracleCrossCheck, ReportRecord, SCHEMA_VERSION};
use crate::spec::ExperimentSpec;
use crate::HarnessError;

/// Largest graph whose per-run estimates are checked against the oracle.
pub const CROSS_CHECK_MAX_N: usize = 256;

/// Runs every repetition of `spec` (in parallel) and returns one record per
/// repetition in seed order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ReportRecord>, HarnessError> {
    spec.validate()?;
    let g = spec.source()?.load(spec.graph_seed)?;
    run_on_graph(spec, &g)
}

pub fn run_on_graph(spec: &ExperimentSpec, g: &Graph) -> Result<Vec<ReportRecord>, HarnessError> {
    spec.validate()?;
    let conductance = (g.n() >= 2 && g.n() <= BRUTE_FORCE_MAX_N && g.m() > 0)
        .then(|| graph_conductance_bruteforce(g).map(|c| c.value))
        .transpose()?;
    (0..spec.reps)
        .into_par_iter()
        .map(|rep| run_one(spec, g, rep, conductance))
        .collect()
}

fn run_one(spec: &ExperimentSpec, g: &Graph, rep: usize, conductance: Option<f64>) -> Result<ReportRecord, HarnessError> {
    let mut cfg = spec.tester.clone();
    cfg.seed = spec.seed.wrapping_add(rep as u64);
    let start = Instant::now();
    let outcome = run_tester(g, &cfg, false);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut record = ReportRecord {
        schema_version: SCHEMA_VERSION,
        graph: spec.graph.clone(),
        n: g.n(),
        m: g.m(),
        mode: cfg.mode.to_string(),
        phi: cfg.phi,
        eps: cfg.eps,
        rep,
        seed: cfg.seed,
        verdict: String::new(),
        reject_reason: None,
        rounds: 0,
        congestion_bits: 0,
        budget_bits: None,
        violations: 0,
        sample_size: 0,
        log_s: Vec::new(),
        oracle: None,
        wall_ms,
    };
    match outcome {
        Ok(run) => {
            let v = &run.verdict;
            record.verdict = if v.decision { "accept" } else { "reject" }.into();
            record.reject_reason = v.reject_reason.map(|r| r.to_string());
            record.rounds = v.rounds;
            record.congestion_bits = v.congestion_bits;
            record.budget_bits = v.budget_bits;
            record.violations = v.violations;
            record.sample_size = v.sample_size;
            record.log_s = v.log_s.iter().map(|&x| x.is_finite().then_some(x)).collect();
            record.oracle = Some(cross_check(g, &run, cfg.mode, conductance)?);
        }
        // Strict mode aborts on the first over-budget message; that is a
        // per-run outcome, not a harness failure.
        Err(Error::Congestion { round, bits, budget, .. }) => {
            record.verdict = "abort".into();
            record.reject_reason = Some("congestion".into());
            record.rounds = round;
            record.congestion_bits = bits;
            record.budget_bits = Some(budget);
            record.violations = 1;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(record)
}

fn cross_check(g: &Graph, run: &TesterRun, mode: WalkMode, conductance: Option<f64>) -> Result<OracleCrossCheck, HarnessError> {
    let mut check = OracleCrossCheck { conductance, max_estimate_error: None, max_s_error: None };
    let sources = &run.verdict.sources;
    let walked = run.estimates.iter().all(|e| e.len() == sources.len());
    if g.n() > CROSS_CHECK_MAX_N || sources.is_empty() || !walked {
        return Ok(check);
    }
    let l = run.schedule.walk_length;
    let (mut est_err, mut s_err) = (0.0f64, 0.0f64);
    for (i, &v) in sources.iter().enumerate() {
        let p = walk_endpoint_distribution(g, v, l)?;
        for (u, &pu) in p.iter().enumerate() {
            est_err = est_err.max((run.estimates[u][i] - pu).abs());
        }
        if let Some(&ls) = run.verdict.log_s.get(i) {
            s_err = s_err.max((ls.exp() - direct_discrepancy(g, &p)).abs());
        }
    }
    check.max_estimate_error = Some(est_err);
    if mode == WalkMode::Exact && run.verdict.log_s.len() == sources.len() {
        check.max_s_error = Some(s_err);
    }
    Ok(check)
}
