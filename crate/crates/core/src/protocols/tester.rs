//! The conductance tester as a single vertex program: BFS election, a size
//! and degree count, source sampling, per-source random walks, and a final
//! discrepancy aggregation. All phases run on a fixed round schedule that
//! every vertex derives from `n` and the configuration.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Schedule, TesterConfig};
use super::tree::{Aggregator, BfsCore, BfsState, CountDegree, SourceList};
use super::walk::WalkCore;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::sim::{
    vertex_rng, Budget, CongestionMode, Inbox, Outbox, RoundTrace, SimConfig, Simulator, VertexProgram,
};

/// Why a vertex (or the whole run) rejected. Ordered by precedence: the
/// run-level reason is the smallest reason reported by any vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    BfsIncomplete,
    SampleTooLarge,
    EndpointTooSmall,
    DiscrepancyLarge,
    Timeout,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::BfsIncomplete => "bfs_incomplete",
            RejectReason::SampleTooLarge => "sample_too_large",
            RejectReason::EndpointTooSmall => "endpoint_too_small",
            RejectReason::DiscrepancyLarge => "discrepancy_large",
            RejectReason::Timeout => "timeout",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RejectReason {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            RejectReason::BfsIncomplete,
            RejectReason::SampleTooLarge,
            RejectReason::EndpointTooSmall,
            RejectReason::DiscrepancyLarge,
            RejectReason::Timeout,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| Error::InvalidInput(format!("unknown reject reason `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub decision: bool,
    /// `None` exactly when `decision` is true.
    pub reject_reason: Option<RejectReason>,
    pub rounds: usize,
    /// Largest message on any directed edge in any round.
    pub congestion_bits: usize,
    pub budget_bits: Option<usize>,
    pub violations: usize,
    /// `|S|` as agreed on by the component of vertex 0 (0 if never known).
    pub sample_size: usize,
    pub sources: Vec<VertexId>,
    /// `ln s_v` per source, as seen by vertex 0; `-inf` for an exact zero.
    pub log_s: Vec<f64>,
}

/// A verdict plus the per-vertex detail the harness and tests inspect.
#[derive(Debug, Clone)]
pub struct TesterRun {
    pub verdict: TestVerdict,
    /// Schedule derived from the declared `n` and the true `m`.
    pub schedule: Schedule,
    pub output_bits: Vec<bool>,
    pub local_reasons: Vec<Option<RejectReason>>,
    /// `estimates[u][i]`: vertex `u`'s estimate of `W^ℓ(sources[i], u)`;
    /// empty where the walk phase never started.
    pub estimates: Vec<Vec<f64>>,
    pub traces: Vec<RoundTrace>,
}

/// Marks each vertex with probability `min(1, scale·d(v)/(2εm))`, using the
/// first draw of the vertex's stream exactly as the tester does.
pub fn sample_starts(g: &Graph, eps: f64, scale: f64, seed: u64) -> VertexSet {
    (0..g.n())
        .filter(|&v| {
            let mut rng = vertex_rng(seed, v);
            mark(&mut rng, g.degree(v), eps, scale, g.m())
        })
        .collect()
}

fn mark(rng: &mut ChaCha8Rng, degree: usize, eps: f64, scale: f64, m: usize) -> bool {
    let draw: f64 = rng.random();
    let p = if m == 0 { 0.0 } else { (scale * degree as f64 / (2.0 * eps * m as f64)).min(1.0) };
    draw < p
}

struct TesterProgram {
    id: VertexId,
    degree: usize,
    n: usize,
    cfg: TesterConfig,
    sched: Schedule,
    rng: ChaCha8Rng,
    bfs: BfsCore,
    tree: Option<BfsState>,
    count: Option<Aggregator<CountDegree>>,
    sample: Option<Aggregator<SourceList>>,
    walk: Option<WalkCore>,
    discrepancy: Option<Aggregator<Vec<f64>>>,
    m: usize,
    reject_threshold: f64,
    log_accept: f64,
    sources: Vec<VertexId>,
    s_totals: Vec<f64>,
    reason: Option<RejectReason>,
    decision: Option<bool>,
}

impl TesterProgram {
    fn reject(&mut self, reason: RejectReason) {
        self.reason = Some(self.reason.map_or(reason, |r| r.min(reason)));
        self.decision = Some(false);
    }

    fn run(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) -> Result<()> {
        let sc = self.sched;
        let b = sc.bfs_depth;
        if round <= b {
            self.bfs.absorb(inbox)?;
            self.bfs.send(outbox);
        } else if round == b + 1 {
            self.bfs.absorb(inbox)?;
            self.bfs.send_registration(outbox);
        } else if round == sc.count_start() {
            let tree = self.bfs.finish(self.degree, inbox)?;
            if tree.conflict {
                self.reject(RejectReason::BfsIncomplete);
                return Ok(());
            }
            let mut agg = Aggregator::new(&tree, CountDegree { count: 1, degree_sum: self.degree as u64 });
            agg.send(outbox);
            self.count = Some(agg);
            self.tree = Some(tree);
        } else if round < sc.sample_start() {
            self.count.as_mut().unwrap().absorb_and_send(inbox, outbox)?;
        } else if round == sc.sample_start() {
            let agg = self.count.as_mut().unwrap();
            agg.absorb(inbox)?;
            let total = agg.total().copied();
            // Always consume the marking draw so later draws line up across
            // vertices regardless of how this phase ends.
            let draw_rng = &mut self.rng;
            match total {
                Some(t) if t.count == self.n as u64 => {
                    self.m = (t.degree_sum / 2) as usize;
                    let resolved = self.cfg.resolve(self.n, self.m)?;
                    self.reject_threshold = resolved.reject_threshold;
                    self.log_accept = resolved.log_accept;
                    let marked = mark(draw_rng, self.degree, self.cfg.eps, self.cfg.sample_scale, self.m);
                    let cap = sc.set_cap;
                    let ids = if marked { vec![self.id] } else { Vec::new() };
                    let mut list = SourceList { overflow: ids.len() > cap, ids, cap };
                    if list.overflow {
                        list.ids.clear();
                    }
                    let mut agg = Aggregator::new(self.tree.as_ref().unwrap(), list);
                    agg.send(outbox);
                    self.sample = Some(agg);
                }
                _ => {
                    let _: f64 = draw_rng.random();
                    self.reject(RejectReason::BfsIncomplete);
                }
            }
        } else if round < sc.walk_start() {
            self.sample.as_mut().unwrap().absorb_and_send(inbox, outbox)?;
        } else if round == sc.walk_start() {
            let agg = self.sample.as_mut().unwrap();
            agg.absorb(inbox)?;
            match agg.total().cloned() {
                None => self.reject(RejectReason::BfsIncomplete),
                Some(list) if list.overflow => self.reject(RejectReason::SampleTooLarge),
                Some(list) => {
                    let own = list.ids.binary_search(&self.id).ok();
                    let mut walk =
                        WalkCore::new(self.cfg.mode, self.degree, list.ids.len(), own, self.cfg.walk_count);
                    self.sources = list.ids;
                    walk.step(&mut self.rng, outbox);
                    self.walk = Some(walk);
                }
            }
        } else if round < sc.discrepancy_start() {
            let walk = self.walk.as_mut().unwrap();
            walk.absorb(inbox)?;
            walk.step(&mut self.rng, outbox);
        } else if round == sc.discrepancy_start() {
            let walk = self.walk.as_mut().unwrap();
            walk.absorb(inbox)?;
            // A reached vertex with a tiny estimate rejects, but keeps
            // relaying the final sums so its neighbors are not starved.
            if walk.endpoint_too_small(self.reject_threshold) {
                self.reason = Some(RejectReason::EndpointTooSmall);
            }
            let terms = walk.discrepancy_terms(self.m);
            let mut agg = Aggregator::new(self.tree.as_ref().unwrap(), terms);
            agg.send(outbox);
            self.discrepancy = Some(agg);
        } else if round < sc.final_round() {
            self.discrepancy.as_mut().unwrap().absorb_and_send(inbox, outbox)?;
        } else {
            let agg = self.discrepancy.as_mut().unwrap();
            agg.absorb(inbox)?;
            match agg.total().cloned() {
                None => self.reject(RejectReason::DiscrepancyLarge),
                Some(s) => {
                    let ok = s.iter().all(|&x| x <= 0.0 || x.ln() <= self.log_accept);
                    self.s_totals = s;
                    match (self.reason, ok) {
                        (Some(r), _) => self.reject(r),
                        (None, false) => self.reject(RejectReason::DiscrepancyLarge),
                        (None, true) => self.decision = Some(true),
                    }
                }
            }
        }
        Ok(())
    }
}

impl VertexProgram for TesterProgram {
    fn compute(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) {
        if let Err(e) = self.run(round, inbox, outbox) {
            // Malformed traffic can only come from an inconsistent tree.
            debug_assert!(matches!(e, Error::Decode(_)), "{e}");
            self.reject(RejectReason::BfsIncomplete);
        }
    }
    fn halted(&self) -> bool {
        self.decision.is_some()
    }
    fn output(&self) -> bool {
        self.decision == Some(true)
    }
}

/// Runs the tester and returns only the verdict.
pub fn test_conductance(g: &Graph, cfg: &TesterConfig) -> Result<TestVerdict> {
    Ok(run_tester(g, cfg, false)?.verdict)
}

/// Runs the tester on `g`. Every vertex is told `cfg.declared_n` (default:
/// the true `n`). Errors only on invalid configuration or, in strict mode,
/// on the first over-budget message.
pub fn run_tester(g: &Graph, cfg: &TesterConfig, record_traces: bool) -> Result<TesterRun> {
    cfg.validate()?;
    let n = cfg.declared_n.unwrap_or(g.n());
    if n == 0 {
        return Err(Error::InvalidInput("declared n must be positive".into()));
    }
    let schedule = cfg.resolve(n, g.m())?;
    let budget = Budget::congest(cfg.congestion_lanes, g.n(), g.m());
    let sim_cfg = SimConfig {
        max_rounds: schedule.final_round() + 2,
        budget,
        mode: if cfg.strict { CongestionMode::Strict } else { CongestionMode::Record },
        record_traces,
        parallel: g.n() >= 256,
    };
    let mut sim = Simulator::new(g, sim_cfg, cfg.seed, |init| TesterProgram {
        id: init.id,
        degree: init.degree,
        n,
        cfg: cfg.clone(),
        sched: schedule,
        rng: init.rng,
        bfs: BfsCore::new(init.id),
        tree: None,
        count: None,
        sample: None,
        walk: None,
        discrepancy: None,
        m: 0,
        reject_threshold: 0.0,
        log_accept: 0.0,
        sources: Vec::new(),
        s_totals: Vec::new(),
        reason: None,
        decision: None,
    });
    let res = sim.run()?;
    let programs = sim.into_programs();
    let local_reasons: Vec<_> = programs.iter().map(|p| p.reason).collect();
    let mut reason = local_reasons.iter().flatten().min().copied();
    if reason.is_none() && res.timed_out {
        reason = Some(RejectReason::Timeout);
    }
    let decision = res.decision && reason.is_none();
    let first = programs.first();
    let sources = first.map(|p| p.sources.clone()).unwrap_or_default();
    let verdict = TestVerdict {
        decision,
        reject_reason: if decision { None } else { reason.or(Some(RejectReason::Timeout)) },
        rounds: res.rounds_executed,
        congestion_bits: res.congestion_bits,
        budget_bits: budget.bits(),
        violations: res.violations.len(),
        sample_size: sources.len(),
        sources,
        log_s: first.map(|p| p.s_totals.iter().map(|x| x.ln()).collect()).unwrap_or_default(),
    };
    Ok(TesterRun {
        verdict,
        schedule,
        output_bits: res.output_bits,
        local_reasons,
        estimates: programs
            .iter()
            .map(|p| p.walk.as_ref().map(|w| w.estimates()).unwrap_or_default())
            .collect(),
        traces: res.traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{barbell, complete, cycle, disjoint_union, path};
    use crate::protocols::config::{AcceptThreshold, WalkMode};
    use crate::spectral::walk_endpoint_distribution;

    fn quick(phi: f64) -> TesterConfig {
        TesterConfig { phi, accept_threshold: AcceptThreshold::Mixing, ..TesterConfig::default() }
    }

    #[test]
    fn two_k4_with_declared_eight() {
        let g = disjoint_union(&[complete(4), complete(4)]);
        let v = test_conductance(&g, &quick(0.5)).unwrap();
        assert!(!v.decision);
        assert_eq!(v.reject_reason, Some(RejectReason::BfsIncomplete));
    }

    #[test]
    fn under_declared_size_rejects() {
        let cfg = TesterConfig { declared_n: Some(9), ..quick(0.5) };
        let v = test_conductance(&complete(8), &cfg).unwrap();
        assert_eq!(v.reject_reason, Some(RejectReason::BfsIncomplete));
    }

    #[test]
    fn k16_accepts_with_exact_discrepancies() {
        let g = complete(16);
        for seed in 0..5 {
            let cfg = TesterConfig { seed, ..quick(0.5) };
            let run = run_tester(&g, &cfg, false).unwrap();
            let v = &run.verdict;
            assert!(v.decision, "{v:?}");
            assert_eq!(v.reject_reason, None);
            assert_eq!(v.violations, 0);
            assert!(v.log_s.iter().all(|&ls| ls <= run.schedule.log_accept));
        }
    }

    #[test]
    fn barbell_rejects_on_discrepancy() {
        let g = barbell(8);
        let mut rejected = 0;
        for seed in 0..10 {
            let v = test_conductance(&g, &TesterConfig { seed, ..quick(0.5) }).unwrap();
            if !v.decision {
                rejected += 1;
                assert!(matches!(
                    v.reject_reason,
                    Some(RejectReason::DiscrepancyLarge | RejectReason::SampleTooLarge)
                ));
            }
        }
        assert!(rejected >= 7);
    }

    #[test]
    fn sample_cap_overflow() {
        let cfg = TesterConfig { set_cap: Some(0), sample_scale: 1e9, ..quick(0.5) };
        let v = test_conductance(&complete(6), &cfg).unwrap();
        assert_eq!(v.reject_reason, Some(RejectReason::SampleTooLarge));
    }

    #[test]
    fn exact_estimates_match_oracle() {
        let g = cycle(7);
        let cfg = TesterConfig {
            walk_length: Some(5),
            sample_scale: 1e9,
            set_cap: Some(7),
            accept_threshold: AcceptThreshold::Ln(0.0),
            ..TesterConfig::default()
        };
        let run = run_tester(&g, &cfg, false).unwrap();
        assert_eq!(run.verdict.sources, (0..7).collect::<Vec<_>>());
        for (i, &src) in run.verdict.sources.iter().enumerate() {
            let p = walk_endpoint_distribution(&g, src, 5).unwrap();
            for u in 0..7 {
                assert!((run.estimates[u][i] - p[u]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn endpoint_floor_rejects_on_long_path() {
        let cfg = TesterConfig {
            walk_length: Some(3),
            sample_scale: 1e9,
            set_cap: Some(10),
            accept_threshold: AcceptThreshold::Ln(0.0),
            ..TesterConfig::default()
        };
        let v = test_conductance(&path(10), &cfg).unwrap();
        assert_eq!(v.reject_reason, Some(RejectReason::EndpointTooSmall));
    }

    #[test]
    fn sampled_mode_runs() {
        let cfg = TesterConfig { mode: WalkMode::Sampled, walk_count: 10_000, ..quick(0.5) };
        let v = test_conductance(&complete(8), &cfg).unwrap();
        assert!(v.decision, "{v:?}");
    }

    #[test]
    fn sample_frequency_on_c8() {
        let g = cycle(8);
        let hits: usize = (0..20_000).map(|s| sample_starts(&g, 0.5, 1.0, s).len()).sum();
        let freq = hits as f64 / (8.0 * 20_000.0);
        assert!((freq - 0.25).abs() < 0.01, "{freq}");
        assert_eq!(sample_starts(&g, 0.5, 0.0, 1).len(), 0);
        assert_eq!(sample_starts(&g, 0.5, 1e6, 1).len(), 8);
    }

    #[test]
    fn reasons_round_trip() {
        for r in ["bfs_incomplete", "sample_too_large", "endpoint_too_small", "discrepancy_large", "timeout"] {
            assert_eq!(r.parse::<RejectReason>().unwrap().to_string(), r);
        }
    }
}
