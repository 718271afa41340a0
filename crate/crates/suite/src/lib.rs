//! Shared pieces of the acceptance suite: graph families and the
//! one-line-per-criterion report.

use std::fmt;
use std::time::{Duration, Instant};

use condtest_core::generate::{barbell, complete, cycle, cycle_of_cliques, path, star};
use condtest_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: usize,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {status}: {}", self.id, self.detail)
    }
}

/// Runs `f`, returning its value and the elapsed wall time.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

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
    let mut g = Graph::from_edges(n, &edges).expect("valid edges");
    g.shuffle_ports(&mut rng);
    g
}

/// Small connected graphs mixing regular, irregular and sparse-cut
/// structure; every member has `2 ≤ n ≤ 20` and at least two edges.
pub fn small_family(count: usize, seed: u64) -> Vec<Graph> {
    let mut out = vec![
        cycle(12),
        complete(10),
        path(10),
        star(9),
        barbell(4),
        barbell(5),
        cycle_of_cliques(3, 4),
        cycle_of_cliques(4, 3),
    ];
    let mut i = 0;
    while out.len() < count {
        let n = 4 + (i as usize * 7) % 17;
        let p = [0.15, 0.3, 0.6][i as usize % 3];
        out.push(connected_graph(n, p, seed.wrapping_add(i)));
        i += 1;
    }
    out.truncate(count);
    out
}

/// Fraction of `true` values.
pub fn rate(xs: impl IntoIterator<Item = bool>) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for x in xs {
        total += 1;
        hit += x as usize;
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}
