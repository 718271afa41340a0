//! Min-id BFS election and convergecast/broadcast over the resulting tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Port, VertexId};
use crate::sim::wire::{Reader, Writer};
use crate::sim::{Inbox, Message, Outbox, SimConfig, Simulator, VertexProgram};

/// A vertex's view of the BFS tree after election.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfsState {
    /// Smallest id this vertex heard of.
    pub root: VertexId,
    pub parent: Option<Port>,
    pub children: Vec<Port>,
    /// Hop distance to `root` along the tree.
    pub depth: usize,
    /// Some neighbor reported a different root.
    pub conflict: bool,
}

/// Flooding state; a vertex adopts any strictly smaller root and records
/// the lowest port it first heard that root on.
#[derive(Debug, Clone)]
pub(crate) struct BfsCore {
    root: VertexId,
    depth: usize,
    parent: Option<Port>,
    changed: bool,
}

impl BfsCore {
    pub fn new(id: VertexId) -> Self {
        BfsCore { root: id, depth: 0, parent: None, changed: true }
    }

    pub fn absorb(&mut self, inbox: &Inbox) -> Result<()> {
        for (port, msg) in inbox.iter() {
            let mut r = Reader::new(msg);
            let root = r.usize()?;
            let depth = r.usize()?;
            if root < self.root {
                self.root = root;
                self.depth = depth + 1;
                self.parent = Some(port);
                self.changed = true;
            }
        }
        Ok(())
    }

    /// Announces `(root, depth)` to every neighbor if it changed.
    pub fn send(&mut self, outbox: &mut Outbox) {
        if self.changed {
            let mut w = Writer::new();
            w.uvar(self.root as u64).uvar(self.depth as u64);
            outbox.broadcast(&w.finish());
            self.changed = false;
        }
    }

    /// Tells each neighbor our root and whether it is our parent.
    pub fn send_registration(&self, outbox: &mut Outbox) {
        for port in 0..outbox.degree() {
            let mut w = Writer::new();
            w.uvar(self.root as u64).uvar(u64::from(self.parent == Some(port)));
            outbox.send(port, w.finish());
        }
    }

    pub fn finish(&self, degree: usize, inbox: &Inbox) -> Result<BfsState> {
        let mut children = Vec::new();
        let mut conflict = false;
        for port in 0..degree {
            match inbox.get(port) {
                Some(msg) => {
                    let mut r = Reader::new(msg);
                    let root = r.usize()?;
                    let is_parent = r.uvar()? == 1;
                    if root != self.root {
                        conflict = true;
                    } else if is_parent {
                        children.push(port);
                    }
                }
                // A silent live neighbor cannot happen in the tester
                // schedule; treat it as inconsistent.
                None => conflict = true,
            }
        }
        Ok(BfsState { root: self.root, parent: self.parent, children, depth: self.depth, conflict })
    }
}

/// Values that can be combined up a tree and shipped over the wire.
pub trait AggValue: Clone + Send {
    fn merge(&mut self, other: &Self);
    fn encode(&self, w: &mut Writer);
    /// Decodes a value shaped like `like` (lengths, caps).
    fn decode(r: &mut Reader<'_>, like: &Self) -> Result<Self>;
}

impl AggValue for f64 {
    fn merge(&mut self, other: &Self) {
        *self += other;
    }
    fn encode(&self, w: &mut Writer) {
        w.f64(*self);
    }
    fn decode(r: &mut Reader<'_>, _: &Self) -> Result<Self> {
        r.f64()
    }
}

impl AggValue for Vec<f64> {
    fn merge(&mut self, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
    }
    fn encode(&self, w: &mut Writer) {
        for &x in self {
            w.f64(x);
        }
    }
    fn decode(r: &mut Reader<'_>, like: &Self) -> Result<Self> {
        (0..like.len()).map(|_| r.f64()).collect()
    }
}

/// `(vertex count, degree sum)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CountDegree {
    pub count: u64,
    pub degree_sum: u64,
}

impl AggValue for CountDegree {
    fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.degree_sum += other.degree_sum;
    }
    fn encode(&self, w: &mut Writer) {
        w.uvar(self.count).uvar(self.degree_sum);
    }
    fn decode(r: &mut Reader<'_>, _: &Self) -> Result<Self> {
        Ok(CountDegree { count: r.uvar()?, degree_sum: r.uvar()? })
    }
}

/// Sorted id union that collapses to an overflow flag past `cap` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SourceList {
    pub ids: Vec<VertexId>,
    pub overflow: bool,
    pub cap: usize,
}

impl AggValue for SourceList {
    fn merge(&mut self, other: &Self) {
        self.overflow |= other.overflow;
        if !self.overflow {
            self.ids.extend_from_slice(&other.ids);
            self.ids.sort_unstable();
            self.ids.dedup();
            self.overflow = self.ids.len() > self.cap;
        }
        if self.overflow {
            self.ids.clear();
        }
    }
    fn encode(&self, w: &mut Writer) {
        w.uvar(u64::from(self.overflow)).uvar(self.ids.len() as u64);
        for &id in &self.ids {
            w.uvar(id as u64);
        }
    }
    fn decode(r: &mut Reader<'_>, like: &Self) -> Result<Self> {
        let overflow = r.uvar()? == 1;
        let len = r.usize()?;
        if len > like.cap {
            return Err(Error::Decode(format!("source list of {len} exceeds cap {}", like.cap)));
        }
        let ids = (0..len).map(|_| r.usize()).collect::<Result<_>>()?;
        Ok(SourceList { ids, overflow, cap: like.cap })
    }
}

/// Convergecast then broadcast over a fixed tree. Partial sums travel up as
/// soon as every child has reported; the root's total travels down.
#[derive(Debug, Clone)]
pub(crate) struct Aggregator<T> {
    parent: Option<Port>,
    children: Vec<Port>,
    waiting: usize,
    acc: T,
    sent_up: bool,
    total: Option<T>,
    sent_down: bool,
}

impl<T: AggValue> Aggregator<T> {
    pub fn new(tree: &BfsState, value: T) -> Self {
        Aggregator {
            parent: tree.parent,
            children: tree.children.clone(),
            waiting: tree.children.len(),
            acc: value,
            sent_up: false,
            total: None,
            sent_down: false,
        }
    }

    pub fn absorb(&mut self, inbox: &Inbox) -> Result<()> {
        for (port, msg) in inbox.iter() {
            let mut r = Reader::new(msg);
            let value = T::decode(&mut r, &self.acc)?;
            if Some(port) == self.parent {
                self.total.get_or_insert(value);
            } else if self.children.contains(&port) && !self.sent_up {
                self.acc.merge(&value);
                self.waiting -= 1;
            }
        }
        Ok(())
    }

    pub fn send(&mut self, outbox: &mut Outbox) {
        if self.waiting == 0 && !self.sent_up {
            self.sent_up = true;
            match self.parent {
                None => self.total = Some(self.acc.clone()),
                Some(p) => outbox.send(p, encode(&self.acc)),
            }
        }
        if let (Some(total), false) = (&self.total, self.sent_down) {
            self.sent_down = true;
            let msg = encode(total);
            for &c in &self.children {
                outbox.send(c, msg.clone());
            }
        }
    }

    pub fn absorb_and_send(&mut self, inbox: &Inbox, outbox: &mut Outbox) -> Result<()> {
        self.absorb(inbox)?;
        self.send(outbox);
        Ok(())
    }

    pub fn total(&self) -> Option<&T> {
        self.total.as_ref()
    }
}

fn encode<T: AggValue>(v: &T) -> Message {
    let mut w = Writer::new();
    v.encode(&mut w);
    w.finish()
}

/// Standalone election program: flood for `depth` rounds, absorb, then one
/// registration exchange to learn children.
struct ElectProgram {
    degree: usize,
    depth: usize,
    core: BfsCore,
    state: Option<BfsState>,
}

impl VertexProgram for ElectProgram {
    fn compute(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) {
        if round <= self.depth + 1 {
            self.core.absorb(inbox).expect("well-formed flood message");
            if round <= self.depth {
                self.core.send(outbox);
            } else {
                self.core.send_registration(outbox);
            }
        } else {
            self.state = Some(self.core.finish(self.degree, inbox).expect("well-formed registration"));
        }
    }
    fn halted(&self) -> bool {
        self.state.is_some()
    }
    fn output(&self) -> bool {
        self.state.as_ref().is_some_and(|s| !s.conflict)
    }
}

/// Runs min-id flooding for `depth` rounds and returns each vertex's tree
/// view. On a connected graph with diameter ≤ `depth`, every vertex agrees
/// on root 0 and the parent pointers form a BFS tree.
pub fn bfs_elect(g: &Graph, depth: usize) -> Result<Vec<BfsState>> {
    if depth == 0 {
        return Err(Error::InvalidInput("BFS depth must be at least 1".into()));
    }
    let mut sim = Simulator::new(g, SimConfig::new(depth + 2), 0, |init| ElectProgram {
        degree: init.degree,
        depth,
        core: BfsCore::new(init.id),
        state: None,
    });
    sim.run()?;
    Ok(sim.into_programs().into_iter().map(|p| p.state.expect("election finishes")).collect())
}

struct SumProgram {
    agg: Aggregator<f64>,
    deadline: usize,
    done: bool,
}

impl VertexProgram for SumProgram {
    fn compute(&mut self, round: usize, inbox: &Inbox, outbox: &mut Outbox) {
        self.agg.absorb(inbox).expect("well-formed partial sum");
        if round > self.deadline {
            self.done = true;
        } else {
            self.agg.send(outbox);
        }
    }
    fn halted(&self) -> bool {
        self.done
    }
    fn output(&self) -> bool {
        self.agg.total().is_some()
    }
}

/// Sums `values` over each tree and hands the total to every vertex within
/// `2·depth` rounds; `None` where the total did not arrive in time.
pub fn aggregate_sum(g: &Graph, trees: &[BfsState], values: &[f64], depth: usize) -> Result<Vec<Option<f64>>> {
    if trees.len() != g.n() || values.len() != g.n() {
        return Err(Error::InvalidInput("one tree view and one value per vertex required".into()));
    }
    let deadline = 2 * depth;
    let mut sim = Simulator::new(g, SimConfig::new(deadline + 1), 0, |init| SumProgram {
        agg: Aggregator::new(&trees[init.id], values[init.id]),
        deadline,
        done: false,
    });
    sim.run()?;
    Ok(sim.programs().iter().map(|p| p.agg.total().copied()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{complete, cycle, disjoint_union, generate, path, GraphKind};

    #[test]
    fn path_of_three() {
        let g = path(3);
        let s = bfs_elect(&g, 2).unwrap();
        assert!(s.iter().all(|b| b.root == 0 && !b.conflict));
        assert_eq!(s[0].parent, None);
        assert_eq!(g.neighbor(1, s[1].parent.unwrap()), 0);
        assert_eq!(g.neighbor(2, s[2].parent.unwrap()), 1);
        assert_eq!(s.iter().map(|b| b.depth).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn two_components_two_roots() {
        let g = disjoint_union(&[complete(4), complete(4)]);
        let s = bfs_elect(&g, 5).unwrap();
        let roots: Vec<_> = s.iter().map(|b| b.root).collect();
        assert_eq!(roots, vec![0, 0, 0, 0, 4, 4, 4, 4]);
    }

    #[test]
    fn shallow_flood_misses_far_vertices() {
        let s = bfs_elect(&cycle(8), 1).unwrap();
        assert!(s.iter().any(|b| b.root != 0));
        assert!(s.iter().any(|b| b.conflict));
    }

    #[test]
    fn tree_is_bfs_on_random_graph() {
        let g = generate(&GraphKind::RandomRegular { n: 40, d: 3 }, 2).unwrap();
        let s = bfs_elect(&g, 40).unwrap();
        let dist = g.bfs_distances(0);
        for v in 0..g.n() {
            assert_eq!(Some(s[v].depth), dist[v]);
            if let Some(p) = s[v].parent {
                let u = g.neighbor(v, p);
                assert_eq!(s[u].depth + 1, s[v].depth);
                assert!(s[u].children.contains(&g.reverse_port(v, p)));
            }
        }
    }

    #[test]
    fn sums() {
        let c4 = cycle(4);
        let t = bfs_elect(&c4, 4).unwrap();
        let half_deg: Vec<f64> = (0..4).map(|v| c4.degree(v) as f64 / 2.0).collect();
        assert_eq!(aggregate_sum(&c4, &t, &half_deg, 4).unwrap(), vec![Some(4.0); 4]);
        let k4 = complete(4);
        let t = bfs_elect(&k4, 2).unwrap();
        assert_eq!(aggregate_sum(&k4, &t, &[1.0; 4], 2).unwrap(), vec![Some(4.0); 4]);
    }

    #[test]
    fn source_list_caps() {
        let mut a = SourceList { ids: vec![1, 5], overflow: false, cap: 3 };
        a.merge(&SourceList { ids: vec![2, 5], overflow: false, cap: 3 });
        assert_eq!(a.ids, vec![1, 2, 5]);
        a.merge(&SourceList { ids: vec![0], overflow: false, cap: 3 });
        assert!(a.overflow && a.ids.is_empty());
    }
}
