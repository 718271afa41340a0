//! Per-source lazy random walks carried as aggregate counts (or exact mass)
//! per edge, never as individual walk traces.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use twofloat::TwoFloat;

use super::config::WalkMode;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::sim::wire::{Reader, Writer};
use crate::sim::{Budget, CongestionMode, Inbox, Outbox, SimConfig, Simulator, VertexProgram};

/// Walk table for one vertex: one entry per source in `S`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Table {
    Mass(Vec<TwoFloat>),
    Counts(Vec<u64>),
}

/// One vertex's share of the walk phase.
#[derive(Debug, Clone)]
pub(crate) struct WalkCore {
    degree: usize,
    walks: u64,
    table: Table,
    /// Walks (or mass) kept plus sent during the last step, per source.
    last_step_total: Vec<f64>,
}

impl WalkCore {
    /// `own_index` is this vertex's position in the sorted source list.
    pub fn new(mode: WalkMode, degree: usize, k: usize, own_index: Option<usize>, walks: u64) -> Self {
        let table = match mode {
            WalkMode::Exact => {
                let mut t = vec![TwoFloat::from(0.0); k];
                if let Some(i) = own_index {
                    t[i] = TwoFloat::from(1.0);
                }
                Table::Mass(t)
            }
            WalkMode::Sampled => {
                let mut t = vec![0; k];
                if let Some(i) = own_index {
                    t[i] = walks;
                }
                Table::Counts(t)
            }
        };
        WalkCore { degree, walks, table, last_step_total: vec![0.0; k] }
    }

    pub fn absorb(&mut self, inbox: &Inbox) -> Result<()> {
        for (_, msg) in inbox.iter() {
            let mut r = Reader::new(msg);
            let entries = r.usize()?;
            for _ in 0..entries {
                let idx = r.usize()?;
                let slot_count = match &self.table {
                    Table::Mass(t) => t.len(),
                    Table::Counts(t) => t.len(),
                };
                if idx >= slot_count {
                    return Err(Error::Decode(format!("source index {idx} out of range")));
                }
                match &mut self.table {
                    Table::Mass(t) => t[idx] += r.dd()?,
                    Table::Counts(t) => t[idx] += r.uvar()?,
                }
            }
        }
        Ok(())
    }

    /// One lazy step: keep half, split the rest evenly over the ports.
    pub fn step(&mut self, rng: &mut ChaCha8Rng, outbox: &mut Outbox) {
        let d = self.degree;
        if d == 0 {
            self.last_step_total = self.totals();
            return;
        }
        let k = self.last_step_total.len();
        let mut bodies: Vec<Writer> = (0..d).map(|_| Writer::new()).collect();
        let mut entries = vec![0u64; d];
        let mut sent = vec![0.0; k];
        match &mut self.table {
            Table::Mass(t) => {
                for (idx, mass) in t.iter_mut().enumerate() {
                    if *mass == TwoFloat::from(0.0) {
                        continue;
                    }
                    let share = *mass / (2.0 * d as f64);
                    *mass = *mass / 2.0;
                    for (body, count) in bodies.iter_mut().zip(entries.iter_mut()) {
                        body.uvar(idx as u64).dd(share);
                        *count += 1;
                    }
                    sent[idx] = (share * d as f64).hi();
                }
            }
            Table::Counts(t) => {
                for (idx, count) in t.iter_mut().enumerate() {
                    if *count == 0 {
                        continue;
                    }
                    let stay = Binomial::new(*count, 0.5).unwrap().sample(rng);
                    let mut rest = *count - stay;
                    sent[idx] = rest as f64;
                    *count = stay;
                    for port in 0..d {
                        let x = if port + 1 == d {
                            rest
                        } else {
                            Binomial::new(rest, 1.0 / (d - port) as f64).unwrap().sample(rng)
                        };
                        rest -= x;
                        if x > 0 {
                            bodies[port].uvar(idx as u64).uvar(x);
                            entries[port] += 1;
                        }
                    }
                }
            }
        }
        for (port, body) in bodies.into_iter().enumerate() {
            if entries[port] == 0 {
                continue;
            }
            let mut w = Writer::new();
            w.uvar(entries[port]);
            let mut msg = w.finish();
            msg.payload.extend_from_slice(&body.finish().payload);
            outbox.send(port, msg);
        }
        self.last_step_total = self.totals().iter().zip(&sent).map(|(a, b)| a + b).collect();
    }

    fn totals(&self) -> Vec<f64> {
        match &self.table {
            Table::Mass(t) => t.iter().map(|x| x.hi()).collect(),
            Table::Counts(t) => t.iter().map(|&x| x as f64).collect(),
        }
    }

    /// Estimated `W^ℓ(v, u)` per source `v`.
    pub fn estimates(&self) -> Vec<f64> {
        match &self.table {
            Table::Mass(t) => t.iter().map(|x| x.hi() + x.lo()).collect(),
            Table::Counts(t) => t.iter().map(|&c| c as f64 / self.walks as f64).collect(),
        }
    }

    /// `s_{v,u} = (Ŵ − d(u)/2m)²` per source; evaluated in double-double
    /// precision in exact mode.
    pub fn discrepancy_terms(&self, m: usize) -> Vec<f64> {
        let pi = TwoFloat::from(self.degree as f64) / (2.0 * m as f64);
        match &self.table {
            Table::Mass(t) => t
                .iter()
                .map(|&x| {
                    let diff = x - pi;
                    (diff * diff).hi()
                })
                .collect(),
            Table::Counts(_) => {
                let pi = pi.hi();
                self.estimates().iter().map(|&w| (w - pi) * (w - pi)).collect()
            }
        }
    }

    /// Whether some nonzero estimate is at or below `floor`.
    pub fn endpoint_too_small(&self, floor: f64) -> bool {
        self.estimates().iter().any(|&w| w > 0.0 && w <= floor)
    }

    pub fn last_step_total(&self) -> &[f64] {
        &self.last_step_total
    }
}

/// `Σ_u (ŵ_u − π_u)²` for an arbitrary estimate vector.
pub fn discrepancy_from_estimates(g: &Graph, estimates: &[f64]) -> f64 {
    let two_m = 2.0 * g.m() as f64;
    estimates
        .iter()
        .enumerate()
        .map(|(u, &w)| {
            let d = w - g.degree(u) as f64 / two_m;
            d * d
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct WalkParams {
    pub steps: usize,
    pub walks: u64,
    pub mode: WalkMode,
    pub seed: u64,
    /// Nonzero estimates at or below this value trigger a local reject.
    pub reject_threshold: f64,
    pub budget: Budget,
    pub strict: bool,
}

impl WalkParams {
    pub fn exact(steps: usize) -> Self {
        WalkParams {
            steps,
            walks: 1,
            mode: WalkMode::Exact,
            seed: 0,
            reject_threshold: 0.0,
            budget: Budget::Unlimited,
            strict: false,
        }
    }

    pub fn sampled(steps: usize, walks: u64, seed: u64) -> Self {
        WalkParams { walks, mode: WalkMode::Sampled, seed, ..WalkParams::exact(steps) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkPhaseResult {
    pub sources: Vec<VertexId>,
    /// `estimates[i][u]`: estimate of `W^ℓ(sources[i], u)`.
    pub estimates: Vec<Vec<f64>>,
    /// `terms[i][u] = s_{sources[i], u}`.
    pub terms: Vec<Vec<f64>>,
    /// `Σ_u terms[i][u]`.
    pub discrepancy: Vec<f64>,
    /// Vertices that hit the small-endpoint rule.
    pub early_reject: Vec<VertexId>,
    /// Per round and source, total walks (or mass) in the network.
    pub step_totals: Vec<Vec<f64>>,
    pub rounds: usize,
    pub congestion_bits: usize,
}

struct WalkProgram {
    core: WalkCore,
    rng: ChaCha8Rng,
    steps: usize,
    done: bool,
}

impl VertexProgram for WalkProgram {
    fn compute(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) {
        self.core.absorb(inbox).expect("well-formed walk message");
        if round <= self.steps {
            self.core.step(&mut self.rng, outbox);
        } else {
            self.done = true;
        }
    }
    fn halted(&self) -> bool {
        self.done
    }
    fn output(&self) -> bool {
        true
    }
}

/// Runs ℓ lazy steps from every source in `s` over the simulator and reports
/// each vertex's estimates and discrepancy terms.
pub fn random_walk_phase(g: &Graph, s: &VertexSet, params: &WalkParams) -> Result<WalkPhaseResult> {
    s.validate(g)?;
    if params.steps == 0 {
        return Err(Error::InvalidInput("walk length must be at least 1".into()));
    }
    if g.m() == 0 {
        return Err(Error::InvalidInput("walks need at least one edge".into()));
    }
    if params.mode == WalkMode::Sampled && params.walks == 0 {
        return Err(Error::InvalidInput("walk count must be positive".into()));
    }
    let sources = s.members().to_vec();
    let k = sources.len();
    let mut cfg = SimConfig::new(params.steps + 1);
    cfg.budget = params.budget;
    cfg.mode = if params.strict { CongestionMode::Strict } else { CongestionMode::Record };
    let mut sim = Simulator::new(g, cfg, params.seed, |init| WalkProgram {
        core: WalkCore::new(
            params.mode,
            init.degree,
            k,
            sources.binary_search(&init.id).ok(),
            params.walks,
        ),
        rng: init.rng,
        steps: params.steps,
        done: false,
    });
    let mut step_totals = Vec::with_capacity(params.steps);
    while sim.step()? {
        let mut totals = vec![0.0; k];
        for p in sim.programs() {
            for (t, x) in totals.iter_mut().zip(p.core.last_step_total()) {
                *t += x;
            }
        }
        step_totals.push(totals);
    }
    let res = sim.result();
    let programs = sim.into_programs();
    let m = g.m();
    let mut estimates = vec![vec![0.0; g.n()]; k];
    let mut terms = vec![vec![0.0; g.n()]; k];
    let mut early_reject = Vec::new();
    for (u, p) in programs.iter().enumerate() {
        for (i, (w, t)) in p.core.estimates().into_iter().zip(p.core.discrepancy_terms(m)).enumerate() {
            estimates[i][u] = w;
            terms[i][u] = t;
        }
        if p.core.endpoint_too_small(params.reject_threshold) {
            early_reject.push(u);
        }
    }
    let discrepancy = terms.iter().map(|row| row.iter().sum()).collect();
    Ok(WalkPhaseResult {
        sources,
        estimates,
        terms,
        discrepancy,
        early_reject,
        step_totals,
        rounds: res.rounds_executed,
        congestion_bits: res.congestion_bits,
    })
}
