mod common;

use common::connected_graph;
use condtest_core::generate::{complete, cycle, path};
use condtest_core::sim::wire::{Reader, Writer};
use condtest_core::sim::{
    decide, Budget, CongestionMode, Inbox, Outbox, SimConfig, Simulator, VertexProgram,
};
use condtest_core::{Error, Graph};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Gossips a running hash of everything heard plus fresh random draws.
struct Gossip {
    rng: ChaCha8Rng,
    state: u64,
    /// `(round, port, value)` for every message read.
    heard: Vec<(usize, usize, u64)>,
    stop: usize,
    done: bool,
}

impl VertexProgram for Gossip {
    fn compute(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) {
        for (port, msg) in inbox.iter() {
            let x = Reader::new(msg).uvar().unwrap();
            self.heard.push((round, port, x));
            self.state = self.state.rotate_left(7) ^ x;
        }
        if round >= self.stop {
            self.done = true;
            return;
        }
        self.state ^= self.rng.random::<u32>() as u64;
        let mut w = Writer::new();
        w.uvar(self.state);
        outbox.broadcast(&w.finish());
    }
    fn halted(&self) -> bool {
        self.done
    }
    fn output(&self) -> bool {
        self.state % 2 == 0
    }
}

fn run_gossip(g: &Graph, seed: u64, rounds: usize, parallel: bool) -> (Vec<u64>, Vec<Vec<(usize, usize, u64)>>, bool) {
    let mut cfg = SimConfig::new(rounds + 1);
    cfg.parallel = parallel;
    cfg.record_traces = true;
    let mut sim = Simulator::new(g, cfg, seed, |init| Gossip {
        state: init.id as u64,
        rng: init.rng,
        heard: Vec::new(),
        stop: rounds,
        done: false,
    });
    let res = sim.run().unwrap();
    let progs = sim.into_programs();
    (progs.iter().map(|p| p.state).collect(), progs.into_iter().map(|p| p.heard).collect(), res.decision)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parallel_and_sequential_agree(n in 2usize..30, p in 0.0f64..0.4, gs in any::<u64>(), seed in any::<u64>()) {
        let g = connected_graph(n, p, gs);
        prop_assert_eq!(run_gossip(&g, seed, 6, false), run_gossip(&g, seed, 6, true));
    }

    #[test]
    fn messages_arrive_one_round_later(n in 2usize..20, gs in any::<u64>()) {
        let g = connected_graph(n, 0.2, gs);
        let (_, heard, _) = run_gossip(&g, 1, 4, false);
        for log in &heard {
            // Sends happen in rounds 1..=3, so reads happen in rounds 2..=4.
            prop_assert!(log.iter().all(|&(r, _, _)| (2..=4).contains(&r)));
        }
    }

    #[test]
    fn state_depends_only_on_radius(extra in 0usize..6, seed in any::<u64>()) {
        // Vertex 0 of a long path cannot see anything past distance r in r
        // rounds, so growing the far end must not change its history.
        let r = 4;
        let a = path(r + 3);
        let mut edges = a.edges();
        let base = a.n();
        for i in 0..extra {
            edges.push((base + i - 1, base + i));
        }
        let b = Graph::from_edges(base + extra, &edges).unwrap();
        let (sa, ha, _) = run_gossip(&a, seed, r, false);
        let (sb, hb, _) = run_gossip(&b, seed, r, false);
        prop_assert_eq!(sa[0], sb[0]);
        prop_assert_eq!(&ha[0], &hb[0]);
    }
}

struct FixedSize {
    bytes: usize,
    done: bool,
}

impl VertexProgram for FixedSize {
    fn compute(&mut self, round: usize, _: &Inbox, outbox: &mut Outbox) {
        if round > 2 {
            self.done = true;
            return;
        }
        outbox.broadcast(&condtest_core::sim::Message::new(vec![0; self.bytes]));
    }
    fn halted(&self) -> bool {
        self.done
    }
    fn output(&self) -> bool {
        true
    }
}

fn run_sized(g: &Graph, bytes: usize, budget: usize, mode: CongestionMode) -> condtest_core::Result<condtest_core::sim::SimulationResult> {
    let mut cfg = SimConfig::new(10);
    cfg.budget = Budget::Bits(budget);
    cfg.mode = mode;
    Simulator::new(g, cfg, 0, |_| FixedSize { bytes, done: false }).run()
}

#[test]
fn record_and_strict_agree_without_violations() {
    let g = cycle(6);
    let rec = run_sized(&g, 4, 32, CongestionMode::Record).unwrap();
    let strict = run_sized(&g, 4, 32, CongestionMode::Strict).unwrap();
    assert_eq!(rec, strict);
    assert!(rec.violations.is_empty());
    assert_eq!(rec.congestion_bits, 32);
}

#[test]
fn strict_mode_aborts_on_first_violation() {
    let g = complete(4);
    let rec = run_sized(&g, 5, 32, CongestionMode::Record).unwrap();
    assert_eq!(rec.violations.len(), 2 * 12);
    match run_sized(&g, 5, 32, CongestionMode::Strict) {
        Err(Error::Congestion { round: 1, bits: 40, budget: 32, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn decision_is_conjunction() {
    assert!(decide(&[]));
    assert!(decide(&[true, true]));
    assert!(!decide(&[true, false, true]));
}
