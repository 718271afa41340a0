//! Exact combinatorial quantities: volumes, cuts, conductance, diameter.

use crate::error::{Error, Result};
use crate::graph::{CutStats, Graph, VertexSet};

/// Largest graph the exhaustive conductance search accepts.
pub const BRUTE_FORCE_MAX_N: usize = 24;

pub fn volume(g: &Graph, s: &VertexSet) -> Result<usize> {
    s.validate(g)?;
    Ok(s.members().iter().map(|&v| g.degree(v)).sum())
}

pub fn cut_stats(g: &Graph, s: &VertexSet) -> Result<CutStats> {
    s.validate(g)?;
    let inside = s.indicator(g.n());
    let mut cut = 0;
    let mut vol_s = 0;
    for &v in s.members() {
        vol_s += g.degree(v);
        cut += g.neighbors(v).iter().filter(|&&w| !inside[w]).count();
    }
    Ok(CutStats {
        cut_edges: cut,
        vol_s,
        vol_complement: 2 * g.m() - vol_s,
    })
}

/// `|E(S, S̄)| / vol(S)`; requires `0 < vol(S) <= vol(S̄)`.
pub fn set_conductance(g: &Graph, s: &VertexSet) -> Result<f64> {
    let c = cut_stats(g, s)?;
    if s.is_empty() || c.vol_s == 0 {
        return Err(Error::Precondition("set must have positive volume".into()));
    }
    if c.vol_s > c.vol_complement {
        return Err(Error::Precondition(format!(
            "vol(S) = {} exceeds vol(complement) = {}",
            c.vol_s, c.vol_complement
        )));
    }
    Ok(c.cut_edges as f64 / c.vol_s as f64)
}

/// Minimum-conductance set found by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct Conductance {
    pub value: f64,
    pub cut_edges: usize,
    pub volume: usize,
    pub witness: VertexSet,
}

/// Graph conductance by enumerating every vertex subset (n ≤ 24).
/// Disconnected graphs have conductance 0, witnessed by their
/// smallest-volume component.
pub fn graph_conductance_bruteforce(g: &Graph) -> Result<Conductance> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::CapacityExceeded {
            what: "brute-force conductance",
            limit: BRUTE_FORCE_MAX_N,
            n,
        });
    }
    if n < 2 || g.m() == 0 {
        return Err(Error::InvalidInput(
            "conductance needs at least two vertices and one edge".into(),
        ));
    }
    if !g.is_connected() {
        let witness = g
            .components()
            .into_iter()
            .map(VertexSet::new)
            .min_by_key(|c| (volume(g, c).unwrap(), c.members()[0]))
            .unwrap();
        let vol = volume(g, &witness)?;
        return Ok(Conductance {
            value: 0.0,
            cut_edges: 0,
            volume: vol,
            witness,
        });
    }
    let masks = adjacency_masks(g);
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let best = sparsest_subset(&masks, full).expect("connected graph with an edge");
    Ok(Conductance {
        value: best.cut as f64 / best.vol as f64,
        cut_edges: best.cut,
        volume: best.vol,
        witness: VertexSet::from_mask(best.mask as u64),
    })
}

pub(crate) fn adjacency_masks(g: &Graph) -> Vec<u32> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u32, |acc, &w| acc | 1 << w))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SubsetCut {
    pub mask: u32,
    pub cut: usize,
    pub vol: usize,
}

/// Minimum `cut/vol` subset of the subgraph induced by `within`, using
/// degrees inside that subgraph. Only subsets with `0 < vol <= total/2`
/// qualify. Ties break on smaller volume, then smaller mask.
pub(crate) fn sparsest_subset(adj: &[u32], within: u32) -> Option<SubsetCut> {
    let verts: Vec<usize> = (0..adj.len()).filter(|&v| within >> v & 1 == 1).collect();
    let deg: Vec<usize> = verts
        .iter()
        .map(|&v| (adj[v] & within).count_ones() as usize)
        .collect();
    let total: usize = deg.iter().sum();
    let k = verts.len();
    let mut mask = 0u32;
    let mut cut = 0usize;
    let mut vol = 0usize;
    let mut best: Option<SubsetCut> = None;
    // Gray-code walk: each step toggles exactly one vertex.
    for i in 1u64..(1u64 << k) {
        let j = i.trailing_zeros() as usize;
        let v = verts[j];
        let bit = 1u32 << v;
        let inner = (adj[v] & mask & !bit).count_ones() as usize;
        if mask & bit == 0 {
            cut = cut + deg[j] - 2 * inner;
            vol += deg[j];
            mask |= bit;
        } else {
            cut = cut + 2 * inner - deg[j];
            vol -= deg[j];
            mask &= !bit;
        }
        if vol == 0 || 2 * vol > total {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let lhs = cut * b.vol;
                let rhs = b.cut * vol;
                lhs < rhs || (lhs == rhs && (vol, mask) < (b.vol, b.mask))
            }
        };
        if better {
            best = Some(SubsetCut { mask, cut, vol });
        }
    }
    best
}

/// Graph diameter, or `Infinite` when disconnected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diameter {
    Finite(usize),
    Infinite,
}

impl Diameter {
    pub fn finite(self) -> Option<usize> {
        match self {
            Diameter::Finite(d) => Some(d),
            Diameter::Infinite => None,
        }
    }
}

pub fn diameter(g: &Graph) -> Diameter {
    let mut best = 0;
    for v in 0..g.n() {
        for d in g.bfs_distances(v) {
            match d {
                Some(d) => best = best.max(d),
                None => return Diameter::Infinite,
            }
        }
    }
    Diameter::Finite(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{complete, cycle, disjoint_union};

    #[test]
    fn volume_examples() {
        assert_eq!(volume(&cycle(4), &VertexSet::all(4)).unwrap(), 8);
        assert_eq!(volume(&complete(4), &VertexSet::empty()).unwrap(), 0);
        assert_eq!(volume(&complete(4), &VertexSet::new(vec![0, 1])).unwrap(), 6);
        assert!(matches!(
            volume(&complete(4), &VertexSet::new(vec![4])),
            Err(Error::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn set_conductance_examples() {
        let c8 = cycle(8);
        assert_eq!(set_conductance(&c8, &VertexSet::new(vec![0, 1, 2, 3])).unwrap(), 0.25);
        let two = disjoint_union(&[complete(4), complete(4)]);
        assert_eq!(set_conductance(&two, &VertexSet::new(vec![0, 1, 2, 3])).unwrap(), 0.0);
        let k4 = complete(4);
        assert_eq!(set_conductance(&k4, &VertexSet::new(vec![0, 1])).unwrap(), 4.0 / 6.0);
        assert!(matches!(
            set_conductance(&k4, &VertexSet::empty()),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            set_conductance(&k4, &VertexSet::new(vec![0, 1, 2])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(graph_conductance_bruteforce(&complete(4)).unwrap().value, 2.0 / 3.0);
        let tri2 = disjoint_union(&[complete(3), complete(3)]);
        assert_eq!(graph_conductance_bruteforce(&tri2).unwrap().value, 0.0);
        let c8 = graph_conductance_bruteforce(&cycle(8)).unwrap();
        assert_eq!(c8.value, 0.25);
        assert_eq!((c8.cut_edges, c8.volume), (2, 8));
        assert!(matches!(
            graph_conductance_bruteforce(&cycle(25)),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&complete(4)), Diameter::Finite(1));
        assert_eq!(diameter(&cycle(8)), Diameter::Finite(4));
        assert_eq!(diameter(&disjoint_union(&[complete(4), complete(4)])), Diameter::Infinite);
    }
}
