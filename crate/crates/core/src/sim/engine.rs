use std::io::{self, Write};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::message::{Inbox, Outbox};
use super::vertex_rng;
use crate::error::{Error, Result};
use crate::graph::{Graph, Port, VertexId};

/// Local knowledge handed to a vertex program at deployment.
#[derive(Debug, Clone)]
pub struct VertexInit {
    pub id: VertexId,
    pub degree: usize,
    pub rng: ChaCha8Rng,
}

/// Per-vertex state machine. Each round the engine calls `compute` with the
/// messages sent to this vertex in the previous round; anything placed in
/// the outbox is delivered at the start of the next round.
pub trait VertexProgram: Send {
    fn compute(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox);
    fn halted(&self) -> bool;
    fn output(&self) -> bool;
}

/// Per-message bit budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Budget {
    Unlimited,
    Bits(usize),
}

impl Budget {
    /// `c · ⌈log2(n + m)⌉` bits.
    pub fn congest(lanes: usize, n: usize, m: usize) -> Self {
        let words = ((n + m).max(2) as f64).log2().ceil() as usize;
        Budget::Bits(lanes * words)
    }

    pub fn bits(self) -> Option<usize> {
        match self {
            Budget::Unlimited => None,
            Budget::Bits(b) => Some(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CongestionMode {
    /// Log over-budget messages and keep going.
    Record,
    /// Abort the run at the first over-budget message.
    Strict,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub max_rounds: usize,
    pub budget: Budget,
    pub mode: CongestionMode,
    pub record_traces: bool,
    /// Run each round's compute phase on the rayon pool.
    pub parallel: bool,
}

impl SimConfig {
    pub fn new(max_rounds: usize) -> Self {
        SimConfig {
            max_rounds,
            budget: Budget::Unlimited,
            mode: CongestionMode::Record,
            record_traces: false,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub round: usize,
    pub vertex: VertexId,
    pub port: Port,
    pub bits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeBits {
    pub src: VertexId,
    pub port: Port,
    pub bits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub edges: Vec<EdgeBits>,
    pub halted: Vec<bool>,
    pub outputs: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub rounds_executed: usize,
    pub output_bits: Vec<bool>,
    pub decision: bool,
    /// Largest message on any directed edge in any round, in bits.
    pub congestion_bits: usize,
    pub total_bits: u64,
    /// The round cap was reached before every vertex halted.
    pub timed_out: bool,
    pub violations: Vec<Violation>,
    pub traces: Vec<RoundTrace>,
}

/// AND of all output bits; true for an empty network.
pub fn decide(outputs: &[bool]) -> bool {
    outputs.iter().all(|&b| b)
}

/// Dumps traces as `round src port bits` lines.
pub fn write_traces<W: Write>(traces: &[RoundTrace], mut w: W) -> io::Result<()> {
    for t in traces {
        for e in &t.edges {
            writeln!(w, "{} {} {} {}", t.round, e.src, e.port, e.bits)?;
        }
    }
    Ok(())
}

pub struct Simulator<'g, P> {
    graph: &'g Graph,
    cfg: SimConfig,
    programs: Vec<P>,
    inboxes: Vec<Inbox>,
    outboxes: Vec<Outbox>,
    round: usize,
    congestion: usize,
    total_bits: u64,
    violations: Vec<Violation>,
    traces: Vec<RoundTrace>,
}

impl<'g, P: VertexProgram> Simulator<'g, P> {
    /// Deploys `factory(init)` at every vertex; vertex `v` gets the RNG
    /// stream `vertex_rng(seed, v)`.
    pub fn new<F>(graph: &'g Graph, cfg: SimConfig, seed: u64, mut factory: F) -> Self
    where
        F: FnMut(VertexInit) -> P,
    {
        let n = graph.n();
        let programs = (0..n)
            .map(|id| {
                factory(VertexInit { id, degree: graph.degree(id), rng: vertex_rng(seed, id) })
            })
            .collect();
        Simulator {
            graph,
            cfg,
            programs,
            inboxes: (0..n).map(|v| Inbox::new(graph.degree(v))).collect(),
            outboxes: (0..n).map(|v| Outbox::new(graph.degree(v))).collect(),
            round: 0,
            congestion: 0,
            total_bits: 0,
            violations: Vec::new(),
            traces: Vec::new(),
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn programs(&self) -> &[P] {
        &self.programs
    }

    pub fn into_programs(self) -> Vec<P> {
        self.programs
    }

    pub fn all_halted(&self) -> bool {
        self.programs.iter().all(|p| p.halted())
    }

    /// Runs one full round: compute at every live vertex, then delivery.
    /// Returns whether any vertex is still live afterwards.
    pub fn step(&mut self) -> Result<bool> {
        self.round += 1;
        let round = self.round;
        let work = |((p, inbox), outbox): ((&mut P, &Inbox), &mut Outbox)| {
            if !p.halted() {
                p.compute(round, inbox, outbox);
            }
        };
        if self.cfg.parallel {
            self.programs
                .par_iter_mut()
                .zip(self.inboxes.par_iter())
                .zip(self.outboxes.par_iter_mut())
                .for_each(work);
        } else {
            self.programs
                .iter_mut()
                .zip(self.inboxes.iter())
                .zip(self.outboxes.iter_mut())
                .for_each(work);
        }
        for inbox in &mut self.inboxes {
            inbox.clear();
        }
        let budget = self.cfg.budget.bits();
        let mut edges = Vec::new();
        for v in 0..self.graph.n() {
            let sent: Vec<_> = self.outboxes[v].drain().collect();
            for (port, msg) in sent {
                let bits = msg.bits();
                self.congestion = self.congestion.max(bits);
                self.total_bits += bits as u64;
                if budget.is_some_and(|b| bits > b) {
                    if self.cfg.mode == CongestionMode::Strict {
                        return Err(Error::Congestion {
                            round,
                            vertex: v,
                            port,
                            bits,
                            budget: budget.unwrap(),
                        });
                    }
                    self.violations.push(Violation { round, vertex: v, port, bits });
                }
                if self.cfg.record_traces {
                    edges.push(EdgeBits { src: v, port, bits });
                }
                let u = self.graph.neighbor(v, port);
                let back = self.graph.reverse_port(v, port);
                self.inboxes[u].put(back, msg);
            }
        }
        if self.cfg.record_traces {
            self.traces.push(RoundTrace {
                round,
                edges,
                halted: self.programs.iter().map(|p| p.halted()).collect(),
                outputs: self.programs.iter().map(|p| p.output()).collect(),
            });
        }
        Ok(!self.all_halted())
    }

    /// Steps until every vertex halts or the round cap is hit.
    pub fn run(&mut self) -> Result<SimulationResult> {
        while self.round < self.cfg.max_rounds && !self.all_halted() {
            self.step()?;
        }
        Ok(self.result())
    }

    pub fn result(&self) -> SimulationResult {
        let output_bits: Vec<bool> = self.programs.iter().map(|p| p.output()).collect();
        SimulationResult {
            rounds_executed: self.round,
            decision: decide(&output_bits),
            output_bits,
            congestion_bits: self.congestion,
            total_bits: self.total_bits,
            timed_out: !self.all_halted(),
            violations: self.violations.clone(),
            traces: self.traces.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{complete, cycle};
    use crate::sim::wire::{Reader, Writer};
    use crate::sim::Message;

    struct HaltAccept {
        done: bool,
    }

    impl VertexProgram for HaltAccept {
        fn compute(&mut self, _: usize, _: &Inbox, _: &mut Outbox) {
            self.done = true;
        }
        fn halted(&self) -> bool {
            self.done
        }
        fn output(&self) -> bool {
            true
        }
    }

    /// Floods the smallest id seen for `rounds` rounds.
    struct MinFlood {
        id: usize,
        best: usize,
        rounds: usize,
        done: bool,
    }

    impl VertexProgram for MinFlood {
        fn compute(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) {
            for (_, m) in inbox.iter() {
                self.best = self.best.min(Reader::new(m).usize().unwrap());
            }
            if round > self.rounds {
                self.done = true;
                return;
            }
            let mut w = Writer::new();
            w.uvar(self.best as u64);
            outbox.broadcast(&w.finish());
        }
        fn halted(&self) -> bool {
            self.done
        }
        fn output(&self) -> bool {
            self.best == self.id
        }
    }

    struct Forever;

    impl VertexProgram for Forever {
        fn compute(&mut self, _: usize, _: &Inbox, _: &mut Outbox) {}
        fn halted(&self) -> bool {
            false
        }
        fn output(&self) -> bool {
            true
        }
    }

    #[test]
    fn halt_immediately() {
        let g = complete(4);
        let mut sim = Simulator::new(&g, SimConfig::new(10), 0, |_| HaltAccept { done: false });
        let r = sim.run().unwrap();
        assert!(r.decision);
        assert_eq!((r.rounds_executed, r.congestion_bits), (1, 0));
        assert!(!r.timed_out);
    }

    #[test]
    fn min_flood_on_c4() {
        let g = cycle(4);
        let mut sim = Simulator::new(&g, SimConfig::new(100), 0, |init| MinFlood {
            id: init.id,
            best: init.id,
            rounds: 4,
            done: false,
        });
        let r = sim.run().unwrap();
        assert_eq!(r.output_bits.iter().filter(|&&b| b).count(), 1);
        assert!(!r.decision);
        assert_eq!(r.congestion_bits, 8);
    }

    #[test]
    fn never_halting_times_out() {
        let g = Graph::empty(1);
        let r = Simulator::new(&g, SimConfig::new(7), 0, |_| Forever).run().unwrap();
        assert!(r.timed_out);
        assert_eq!(r.rounds_executed, 7);
    }

    #[test]
    fn decide_rule() {
        assert!(decide(&[true, true]));
        assert!(!decide(&[true, false, true]));
        assert!(decide(&[]));
    }

    #[test]
    fn budget_word_size() {
        assert_eq!(Budget::congest(2, 10, 6), Budget::Bits(8));
        assert_eq!(Message::new(vec![0; 8]).bits(), 64);
    }

    struct Chatty;

    impl VertexProgram for Chatty {
        fn compute(&mut self, _: usize, _: &Inbox, outbox: &mut Outbox) {
            outbox.broadcast(&Message::new(vec![1, 2]));
        }
        fn halted(&self) -> bool {
            false
        }
        fn output(&self) -> bool {
            true
        }
    }

    #[test]
    fn strict_and_record_modes() {
        let g = cycle(3);
        let mut cfg = SimConfig::new(3);
        cfg.budget = Budget::Bits(8);
        let r = Simulator::new(&g, cfg.clone(), 0, |_| Chatty).run().unwrap();
        assert_eq!(r.violations.len(), 3 * 2 * 3);
        cfg.mode = CongestionMode::Strict;
        let err = Simulator::new(&g, cfg, 0, |_| Chatty).run().unwrap_err();
        assert!(matches!(err, Error::Congestion { round: 1, vertex: 0, port: 0, bits: 16, budget: 8 }));
    }

    #[test]
    fn traces_dump_lines() {
        let g = cycle(3);
        let mut cfg = SimConfig::new(1);
        cfg.record_traces = true;
        let r = Simulator::new(&g, cfg, 0, |_| Chatty).run().unwrap();
        let mut out = Vec::new();
        write_traces(&r.traces, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("1 0 0 16\n"));
    }
}
