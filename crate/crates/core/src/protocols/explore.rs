//! Size discovery when vertices do not know `n`.
//!
//! Every vertex starts as the maintainer of its own exploration; a vertex
//! that hears of a smaller maintainer joins it (one BFS level further out)
//! and drops everything it knew. Each maintainer grows its ball level by
//! level, learning the count, volume and boundary of every layer through a
//! pipelined convergecast. While the ball's boundary is at least `Φ` times
//! its volume it keeps growing (phase 1); once it falls below, it explores
//! `⌊ln vol / ln(1/(1−Φ))⌋ + 1` further levels (phase 2) and then decides.
//! It outputs the ball's size only if nothing lies beyond it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Port, VertexId};
use crate::sim::wire::{Reader, Writer};
use crate::sim::{Inbox, Outbox, SimConfig, Simulator, VertexProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploreResult {
    Size(usize),
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreOutcome {
    /// `Size(k)` iff every vertex output the same `k`.
    pub result: ExploreResult,
    pub rounds: usize,
    /// Per-vertex outputs; `None` where a vertex never decided.
    pub outputs: Vec<Option<ExploreResult>>,
}

/// Per-layer statistics reported toward the maintainer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Layer {
    count: u64,
    vol: u64,
    /// Edges from this layer to the next one.
    cut: u64,
    max_id: u64,
}

impl Layer {
    fn merge(&mut self, o: &Layer) {
        self.count += o.count;
        self.vol += o.vol;
        self.cut += o.cut;
        self.max_id = self.max_id.max(o.max_id);
    }
}

const ANNOUNCE: u64 = 0;
const REPORT: u64 = 1;
const DECISION: u64 = 2;

enum Item {
    Announce { maint: usize, level: usize },
    Report { maint: usize, j: usize, layer: Layer },
    Decision { maint: usize, result: ExploreResult },
}

fn decode_items(r: &mut Reader<'_>) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    while !r.is_done() {
        let item = match r.uvar()? {
            ANNOUNCE => Item::Announce { maint: r.usize()?, level: r.usize()? },
            REPORT => Item::Report {
                maint: r.usize()?,
                j: r.usize()?,
                layer: Layer { count: r.uvar()?, vol: r.uvar()?, cut: r.uvar()?, max_id: r.uvar()? },
            },
            DECISION => {
                let maint = r.usize()?;
                let result = match r.uvar()? {
                    0 => ExploreResult::Reject,
                    k => ExploreResult::Size(k as usize - 1),
                };
                Item::Decision { maint, result }
            }
            t => return Err(Error::Decode(format!("unknown item tag {t}"))),
        };
        items.push(item);
    }
    Ok(items)
}

/// Maintainer-side bookkeeping.
#[derive(Debug, Clone, Default)]
struct RootState {
    next_layer: usize,
    count: u64,
    vol: u64,
    max_id: u64,
    /// Final layer index once phase 1 has ended.
    last_layer: Option<usize>,
}

struct ExploreProgram {
    id: VertexId,
    degree: usize,
    phi: f64,
    maint: usize,
    level: usize,
    parent: Option<Port>,
    announce: bool,
    /// Level announced by each neighbor under the current maintainer.
    nbr_level: Vec<Option<usize>>,
    pending: BTreeMap<usize, Layer>,
    root: RootState,
    result: Option<ExploreResult>,
}

impl ExploreProgram {
    fn new(id: VertexId, degree: usize, phi: f64) -> Self {
        ExploreProgram {
            id,
            degree,
            phi,
            maint: id,
            level: 0,
            parent: None,
            announce: true,
            nbr_level: vec![None; degree],
            pending: BTreeMap::new(),
            root: RootState::default(),
            result: None,
        }
    }

    fn adopt(&mut self, maint: usize, level: usize, parent: Port) {
        self.maint = maint;
        self.level = level;
        self.parent = Some(parent);
        self.announce = true;
        self.nbr_level.iter_mut().for_each(|l| *l = None);
        self.pending.clear();
        self.root = RootState::default();
    }

    /// Phase-2 length for a ball of volume `vol`.
    fn extra_levels(&self, vol: u64) -> usize {
        let shrink = -(1.0 - self.phi).ln();
        let v = (vol.max(1) as f64).ln();
        if shrink.is_finite() { (v / shrink).floor() as usize + 1 } else { 1 }
    }

    fn step(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) -> Result<()> {
        let mut parsed = Vec::new();
        for (port, msg) in inbox.iter() {
            parsed.push((port, decode_items(&mut Reader::new(msg))?));
        }
        // Announcements first, so a suppressed maintainer never acts on
        // data gathered under its own name in the same round.
        let best = parsed
            .iter()
            .flat_map(|(p, items)| {
                items.iter().filter_map(move |it| match *it {
                    Item::Announce { maint, level } => Some((maint, level, *p)),
                    _ => None,
                })
            })
            .min();
        if let Some((maint, level, port)) = best {
            if maint < self.maint {
                self.adopt(maint, level + 1, port);
            }
        }
        let mut out: Vec<Writer> = (0..self.degree).map(|_| Writer::new()).collect();
        for (port, items) in &parsed {
            for it in items {
                match *it {
                    Item::Announce { maint, level } if maint == self.maint => {
                        self.nbr_level[*port] = Some(level);
                    }
                    Item::Report { maint, j, layer } if maint == self.maint && j >= self.level => {
                        self.pending.entry(j).or_default().merge(&layer);
                    }
                    Item::Decision { maint, result } if maint == self.maint && self.maint != self.id => {
                        if self.result.is_none() {
                            self.result = Some(result);
                        }
                    }
                    _ => {}
                }
            }
        }
        if let Some(result) = self.result {
            self.broadcast_decision(result, &mut out);
            flush(out, outbox);
            return Ok(());
        }
        if round == self.level + 2 {
            let inside = self.nbr_level.iter().flatten().filter(|&&l| l <= self.level).count();
            let own = Layer {
                count: 1,
                vol: self.degree as u64,
                cut: (self.degree - inside) as u64,
                max_id: self.id as u64,
            };
            self.pending.entry(self.level).or_default().merge(&own);
        }
        if self.maint == self.id {
            self.process_layer(round, &mut out);
        } else if (round + self.level) % 2 == 0 && round + self.level >= 2 {
            let j = (round + self.level - 2) / 2;
            if j >= self.level {
                if let Some(layer) = self.pending.remove(&j) {
                    let w = &mut out[self.parent.expect("non-maintainer has a parent")];
                    w.uvar(REPORT).uvar(self.maint as u64).uvar(j as u64);
                    w.uvar(layer.count).uvar(layer.vol).uvar(layer.cut).uvar(layer.max_id);
                }
            }
        }
        if self.announce {
            self.announce = false;
            for w in &mut out {
                w.uvar(ANNOUNCE).uvar(self.maint as u64).uvar(self.level as u64);
            }
        }
        flush(out, outbox);
        Ok(())
    }

    fn process_layer(&mut self, round: usize, out: &mut [Writer]) {
        let j = self.root.next_layer;
        if round != 2 * j + 2 {
            return;
        }
        self.root.next_layer += 1;
        let layer = self.pending.remove(&j).unwrap_or_default();
        let rs = &mut self.root;
        rs.count += layer.count;
        rs.vol += layer.vol;
        rs.max_id = rs.max_id.max(layer.max_id);
        if rs.last_layer.is_none() && (rs.vol == 0 || (layer.cut as f64) < self.phi * rs.vol as f64) {
            let extra = self.extra_levels(self.root.vol);
            self.root.last_layer = Some(j + extra);
        }
        if self.root.last_layer == Some(j) {
            let rs = &self.root;
            let complete = layer.cut == 0 && self.id == 0 && rs.count == rs.max_id + 1;
            let result = if complete { ExploreResult::Size(rs.count as usize) } else { ExploreResult::Reject };
            self.result = Some(result);
            self.broadcast_decision(result, out);
        }
    }

    fn broadcast_decision(&self, result: ExploreResult, out: &mut [Writer]) {
        let code = match result {
            ExploreResult::Reject => 0,
            ExploreResult::Size(k) => k as u64 + 1,
        };
        for w in out {
            w.uvar(DECISION).uvar(self.maint as u64).uvar(code);
        }
    }
}

fn flush(out: Vec<Writer>, outbox: &mut Outbox) {
    for (port, w) in out.into_iter().enumerate() {
        if !w.is_empty() {
            outbox.send(port, w.finish());
        }
    }
}

impl VertexProgram for ExploreProgram {
    fn compute(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) {
        self.step(round, inbox, outbox).expect("well-formed exploration message");
    }
    fn halted(&self) -> bool {
        self.result.is_some()
    }
    fn output(&self) -> bool {
        matches!(self.result, Some(ExploreResult::Size(_)))
    }
}

/// Round cap: the last layer index is at most `n + ⌊ln 2m / ln(1/(1−Φ))⌋ + 1`,
/// it is processed at round `2L + 2`, and the decision then travels at
/// most `n` hops.
fn round_cap(g: &Graph, phi: f64) -> usize {
    let probe = ExploreProgram::new(0, 0, phi);
    let last = g.n() + probe.extra_levels(2 * g.m() as u64);
    2 * last + 2 + g.n() + 2
}

/// Runs the exploration with target conductance `phi` (vertices are not
/// told `n`). Ids are `0..n`, so a maintainer whose ball is closed and
/// holds exactly the ids `0..k` knows it has seen the whole network.
pub fn unknown_size_explore(g: &Graph, phi: f64) -> Result<ExploreOutcome> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::InvalidInput("phi must lie in (0, 1]".into()));
    }
    let mut sim = Simulator::new(g, SimConfig::new(round_cap(g, phi)), 0, |init| {
        ExploreProgram::new(init.id, init.degree, phi)
    });
    let res = sim.run()?;
    let outputs: Vec<_> = sim.programs().iter().map(|p| p.result).collect();
    let result = match outputs.first() {
        Some(Some(ExploreResult::Size(k))) if outputs.iter().all(|o| *o == Some(ExploreResult::Size(*k))) => {
            ExploreResult::Size(*k)
        }
        _ => ExploreResult::Reject,
    };
    Ok(ExploreOutcome { result, rounds: res.rounds_executed, outputs })
}
