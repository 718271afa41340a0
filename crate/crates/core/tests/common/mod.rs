#![allow(dead_code)]

use condtest_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random spanning tree on `n` vertices plus each remaining pair with
/// probability `p`, ports shuffled.
pub fn connected_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let mut g = Graph::from_edges(n, &edges).unwrap();
    g.shuffle_ports(&mut rng);
    g
}
