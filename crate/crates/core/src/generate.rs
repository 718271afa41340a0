//! Instance generators. `generate` randomizes port numbering from the seed;
//! the free functions return canonical (ascending) port order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Restarts allowed before the random-regular pairing gives up.
const REGULAR_MAX_RESTARTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    Cycle(usize),
    Complete(usize),
    Path(usize),
    Star(usize),
    /// Two copies of K_k joined by a single bridge edge.
    Barbell(usize),
    RandomRegular { n: usize, d: usize },
    Gnp { n: usize, p: f64 },
    /// `count` cliques of `size` vertices arranged in a ring, neighbors
    /// joined by one edge.
    CycleOfCliques { count: usize, size: usize },
    DisjointUnion(Vec<GraphKind>),
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs n >= 3");
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    Graph::from_edges(n, &edges).unwrap()
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

/// Star with center 0 and `n - 1` leaves.
pub fn star(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

/// Two K_k on `0..k` and `k..2k`, bridged by `(k-1, k)`.
pub fn barbell(k: usize) -> Graph {
    let mut edges = Vec::new();
    for side in [0, k] {
        for u in 0..k {
            for v in u + 1..k {
                edges.push((side + u, side + v));
            }
        }
    }
    edges.push((k - 1, k));
    Graph::from_edges(2 * k, &edges).unwrap()
}

pub fn cycle_of_cliques(count: usize, size: usize) -> Graph {
    let mut edges = Vec::new();
    for c in 0..count {
        let base = c * size;
        for u in 0..size {
            for v in u + 1..size {
                edges.push((base + u, base + v));
            }
        }
        if count > 1 && (count > 2 || c == 0) {
            // Last vertex of this clique to first vertex of the next.
            let next = ((c + 1) % count) * size;
            edges.push((base + size - 1, next));
        }
    }
    Graph::from_edges(count * size, &edges).unwrap()
}

/// Vertex-disjoint union; part `i` is shifted past all earlier parts.
pub fn disjoint_union(parts: &[Graph]) -> Graph {
    let mut lists: Vec<Vec<VertexId>> = Vec::new();
    for g in parts {
        let offset = lists.len();
        for v in 0..g.n() {
            lists.push(g.neighbors(v).iter().map(|&w| w + offset).collect());
        }
    }
    Graph::from_port_lists(lists).unwrap()
}

/// Uniform-ish random d-regular simple graph by stub pairing with restarts.
pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    if d >= n || (n * d) % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "random regular graph needs d < n and n*d even (n={n}, d={d})"
        )));
    }
    'restart: for _ in 0..REGULAR_MAX_RESTARTS {
        let mut stubs: Vec<VertexId> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut adj = vec![Vec::with_capacity(d); n];
        while !stubs.is_empty() {
            let mut paired = false;
            for _ in 0..100 {
                let i = rng.random_range(0..stubs.len());
                let j = rng.random_range(0..stubs.len());
                let (u, v) = (stubs[i], stubs[j]);
                if i == j || u == v || adj[u].contains(&v) {
                    continue;
                }
                adj[u].push(v);
                adj[v].push(u);
                let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
                paired = true;
                break;
            }
            if !paired {
                continue 'restart;
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        return Graph::from_port_lists(adj);
    }
    Err(Error::InvalidInput(format!(
        "failed to sample a simple {d}-regular graph on {n} vertices"
    )))
}

pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("edge probability {p} not in [0,1]")));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

impl GraphKind {
    /// Canonical-port instance; randomness only for the random families.
    fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{self}: {what}")))
            }
        };
        Ok(match *self {
            GraphKind::Cycle(n) => {
                need(n >= 3, "cycle needs n >= 3")?;
                cycle(n)
            }
            GraphKind::Complete(n) => {
                need(n >= 1, "complete graph needs n >= 1")?;
                complete(n)
            }
            GraphKind::Path(n) => {
                need(n >= 1, "path needs n >= 1")?;
                path(n)
            }
            GraphKind::Star(n) => {
                need(n >= 2, "star needs n >= 2")?;
                star(n)
            }
            GraphKind::Barbell(k) => {
                need(k >= 2, "barbell needs k >= 2")?;
                barbell(k)
            }
            GraphKind::RandomRegular { n, d } => random_regular(n, d, rng)?,
            GraphKind::Gnp { n, p } => gnp(n, p, rng)?,
            GraphKind::CycleOfCliques { count, size } => {
                need(count >= 1 && size >= 1, "needs count, size >= 1")?;
                cycle_of_cliques(count, size)
            }
            GraphKind::DisjointUnion(ref parts) => {
                need(!parts.is_empty(), "union needs at least one part")?;
                let built = parts
                    .iter()
                    .map(|p| p.build(rng))
                    .collect::<Result<Vec<_>>>()?;
                disjoint_union(&built)
            }
        })
    }
}

/// Builds an instance with port numbering drawn uniformly from `seed`.
/// The same `(kind, seed)` always yields the same graph.
pub fn generate(kind: &GraphKind, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = kind.build(&mut rng)?;
    g.shuffle_ports(&mut rng);
    Ok(g)
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Cycle(n) => write!(f, "cycle:{n}"),
            GraphKind::Complete(n) => write!(f, "complete:{n}"),
            GraphKind::Path(n) => write!(f, "path:{n}"),
            GraphKind::Star(n) => write!(f, "star:{n}"),
            GraphKind::Barbell(k) => write!(f, "barbell:{k}"),
            GraphKind::RandomRegular { n, d } => write!(f, "random-regular:{n}:{d}"),
            GraphKind::Gnp { n, p } => write!(f, "gnp:{n}:{p}"),
            GraphKind::CycleOfCliques { count, size } => {
                write!(f, "cycle-of-cliques:{count}:{size}")
            }
            GraphKind::DisjointUnion(parts) => {
                write!(f, "union:")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    /// Parses `name:arg[:arg]`, e.g. `barbell:8`, `random-regular:64:3`,
    /// `union:complete:4+complete:4`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::InvalidInput(format!("graph kind `{s}`: {msg}"));
        if let Some(rest) = s.strip_prefix("union:") {
            let parts = rest
                .split('+')
                .map(str::parse)
                .collect::<Result<Vec<GraphKind>>>()?;
            return Ok(GraphKind::DisjointUnion(parts));
        }
        let mut it = s.split(':');
        let name = it.next().unwrap_or_default().replace('_', "-");
        let args: Vec<&str> = it.collect();
        let int = |i: usize| -> Result<usize> {
            args.get(i)
                .ok_or_else(|| bad("missing argument"))?
                .parse()
                .map_err(|_| bad("expected an integer"))
        };
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(bad(&format!("expected {k} argument(s)")))
            }
        };
        let kind = match name.as_str() {
            "cycle" => GraphKind::Cycle(int(0)?),
            "complete" => GraphKind::Complete(int(0)?),
            "path" => GraphKind::Path(int(0)?),
            "star" => GraphKind::Star(int(0)?),
            "barbell" => GraphKind::Barbell(int(0)?),
            "random-regular" => {
                arity(2)?;
                GraphKind::RandomRegular { n: int(0)?, d: int(1)? }
            }
            "gnp" => {
                arity(2)?;
                let p = args[1].parse().map_err(|_| bad("expected a probability"))?;
                GraphKind::Gnp { n: int(0)?, p }
            }
            "cycle-of-cliques" => {
                arity(2)?;
                GraphKind::CycleOfCliques { count: int(0)?, size: int(1)? }
            }
            _ => return Err(bad("unknown generator")),
        };
        if !matches!(
            kind,
            GraphKind::RandomRegular { .. } | GraphKind::Gnp { .. } | GraphKind::CycleOfCliques { .. }
        ) {
            arity(1)?;
        }
        Ok(kind)
    }
}
