//! Port-numbered simple undirected graphs.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

pub type VertexId = usize;
/// Local port index at a vertex, `0..deg(v)`.
pub type Port = usize;

/// Simple undirected graph where each vertex orders its neighbors by port.
///
/// `ports[v][p]` is the neighbor reached through port `p` of `v`;
/// `reverse[v][p]` is the port at that neighbor leading back to `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    ports: Vec<Vec<VertexId>>,
    reverse: Vec<Vec<Port>>,
    edge_count: usize,
}

impl Graph {
    /// Empty graph on `n` isolated vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            ports: vec![Vec::new(); n],
            reverse: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an undirected edge list. Port order is ascending
    /// neighbor id.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!("parallel edge at vertex {v}")));
            }
        }
        Self::from_port_lists(adj)
    }

    /// Builds a graph from explicit port lists: `lists[v][p]` is the neighbor
    /// behind port `p` of `v`. Validates symmetry and simplicity.
    pub fn from_port_lists(lists: Vec<Vec<VertexId>>) -> Result<Self> {
        let n = lists.len();
        let mut total = 0usize;
        for (v, list) in lists.iter().enumerate() {
            let mut seen = list.clone();
            seen.sort_unstable();
            for w in seen.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidInput(format!("parallel edge {v}-{}", w[0])));
                }
            }
            for &u in list {
                if u >= n {
                    return Err(Error::VertexOutOfRange { vertex: u, n });
                }
                if u == v {
                    return Err(Error::InvalidInput(format!("self-loop at vertex {v}")));
                }
            }
            total += list.len();
        }
        let reverse = compute_reverse(&lists)?;
        Ok(Graph {
            ports: lists,
            reverse,
            edge_count: total / 2,
        })
    }

    /// Replaces every vertex's port order with a uniformly random permutation.
    pub fn shuffle_ports<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for list in &mut self.ports {
            list.shuffle(rng);
        }
        self.reverse = compute_reverse(&self.ports).expect("shuffling preserves symmetry");
    }

    pub fn n(&self) -> usize {
        self.ports.len()
    }

    pub fn m(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.ports[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.ports.iter().map(Vec::len).collect()
    }

    /// Neighbors of `v` in port order.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.ports[v]
    }

    pub fn neighbor(&self, v: VertexId, port: Port) -> VertexId {
        self.ports[v][port]
    }

    /// Port at `neighbor(v, port)` that leads back to `v`.
    pub fn reverse_port(&self, v: VertexId, port: Port) -> Port {
        self.reverse[v][port]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.ports[u].contains(&v)
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out: Vec<_> = self
            .ports
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    /// BFS distances from `src`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, src: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.ports[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut label = vec![usize::MAX; self.n()];
        let mut comps = Vec::new();
        for s in 0..self.n() {
            if label[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![s];
            label[s] = id;
            let mut i = 0;
            while i < members.len() {
                let u = members[i];
                i += 1;
                for &w in &self.ports[u] {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// Relabels vertex `v` as `perm[v]`, keeping each vertex's port order.
    pub fn relabel(&self, perm: &[VertexId]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let mut lists = vec![Vec::new(); n];
        let mut hit = vec![false; n];
        for (v, &p) in perm.iter().enumerate() {
            if p >= n || hit[p] {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
            hit[p] = true;
            lists[p] = self.ports[v].iter().map(|&w| perm[w]).collect();
        }
        Self::from_port_lists(lists)
    }

    /// Subgraph induced by `keep` (sorted ids), relabeled to `0..keep.len()`.
    pub fn induced(&self, keep: &[VertexId]) -> Self {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let lists = keep
            .iter()
            .map(|&v| {
                self.ports[v]
                    .iter()
                    .filter(|&&w| index[w] != usize::MAX)
                    .map(|&w| index[w])
                    .collect()
            })
            .collect();
        Self::from_port_lists(lists).expect("induced subgraph of a valid graph is valid")
    }
}

fn compute_reverse(lists: &[Vec<VertexId>]) -> Result<Vec<Vec<Port>>> {
    let n = lists.len();
    // Position of each (v -> u) entry, looked up from u's side.
    let mut lookup: Vec<std::collections::HashMap<VertexId, Port>> = Vec::with_capacity(n);
    for list in lists {
        lookup.push(list.iter().enumerate().map(|(p, &u)| (u, p)).collect());
    }
    let mut reverse = Vec::with_capacity(n);
    for (v, list) in lists.iter().enumerate() {
        let mut rev = Vec::with_capacity(list.len());
        for &u in list {
            match lookup[u].get(&v) {
                Some(&q) => rev.push(q),
                None => {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric adjacency: {v} lists {u} but not vice versa"
                    )))
                }
            }
        }
        reverse.push(rev);
    }
    Ok(reverse)
}

/// Sorted, deduplicated set of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct VertexSet {
    members: Vec<VertexId>,
}

impl VertexSet {
    pub fn new(mut members: Vec<VertexId>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSet { members }
    }

    pub fn empty() -> Self {
        VertexSet::default()
    }

    pub fn all(n: usize) -> Self {
        VertexSet { members: (0..n).collect() }
    }

    pub fn from_mask(mask: u64) -> Self {
        VertexSet {
            members: (0..64).filter(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Checks every member is a vertex of `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        match self.members.last() {
            Some(&v) if v >= g.n() => Err(Error::VertexOutOfRange { vertex: v, n: g.n() }),
            _ => Ok(()),
        }
    }

    /// Membership indicator over `0..n`.
    pub fn indicator(&self, n: usize) -> Vec<bool> {
        let mut ind = vec![false; n];
        for &v in &self.members {
            ind[v] = true;
        }
        ind
    }

    pub fn complement(&self, n: usize) -> Self {
        let ind = self.indicator(n);
        VertexSet {
            members: (0..n).filter(|&v| !ind[v]).collect(),
        }
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

/// Cut size and volumes on both sides of a vertex set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutStats {
    pub cut_edges: usize,
    pub vol_s: usize,
    pub vol_complement: usize,
}
