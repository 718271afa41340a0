mod common;

use common::connected_graph;
use condtest_core::generate::{barbell, complete, cycle, disjoint_union, path};
use condtest_core::metrics::graph_conductance_bruteforce;
use condtest_core::protocols::{
    aggregate_sum, bfs_elect, discrepancy_from_estimates, random_walk_phase, run_tester,
    unknown_size_explore, AcceptThreshold, ExploreResult, TesterConfig, WalkMode, WalkParams,
};
use condtest_core::spectral::{direct_discrepancy, walk_endpoint_distribution};
use condtest_core::VertexSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn election_builds_a_bfs_tree(n in 1usize..30, p in 0.0f64..0.3, gs in any::<u64>()) {
        let g = connected_graph(n, p, gs);
        let states = bfs_elect(&g, n).unwrap();
        let dist = g.bfs_distances(0);
        prop_assert_eq!(states.iter().filter(|s| s.parent.is_none()).count(), 1);
        for v in 0..n {
            prop_assert_eq!(states[v].root, 0);
            prop_assert!(!states[v].conflict);
            prop_assert_eq!(Some(states[v].depth), dist[v]);
            for &c in &states[v].children {
                let u = g.neighbor(v, c);
                prop_assert_eq!(states[u].parent, Some(g.reverse_port(v, c)));
            }
        }
        let ones = vec![1.0; n];
        let depth = dist.iter().flatten().max().copied().unwrap().max(1);
        let sums = aggregate_sum(&g, &states, &ones, depth).unwrap();
        prop_assert!(sums.iter().all(|&s| s == Some(n as f64)));
    }

    #[test]
    fn sampled_walks_conserve_counts(n in 2usize..16, gs in any::<u64>(), seed in any::<u64>(), steps in 1usize..12) {
        let g = connected_graph(n, 0.3, gs);
        let s = VertexSet::new(vec![0, n - 1]);
        let walks = 5_000;
        let r = random_walk_phase(&g, &s, &WalkParams::sampled(steps, walks, seed)).unwrap();
        for row in &r.step_totals {
            prop_assert!(row.iter().all(|&t| t == walks as f64));
        }
        for est in &r.estimates {
            prop_assert!((est.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_walks_match_oracle(n in 2usize..40, gs in any::<u64>(), steps in 1usize..30) {
        let g = connected_graph(n, 0.15, gs);
        let r = random_walk_phase(&g, &VertexSet::all(n), &WalkParams::exact(steps)).unwrap();
        for (i, &v) in r.sources.iter().enumerate() {
            let p = walk_endpoint_distribution(&g, v, steps).unwrap();
            prop_assert!((r.estimates[i].iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for u in 0..n {
                prop_assert!((r.estimates[i][u] - p[u]).abs() <= 1e-12);
            }
            prop_assert!((r.discrepancy[i] - direct_discrepancy(&g, &p)).abs() <= 1e-11);
        }
    }

    #[test]
    fn perturbed_estimates_stay_within_error_bound(n in 2usize..20, gs in any::<u64>(), eta in 1e-6f64..1e-2, seed in any::<u64>()) {
        let g = connected_graph(n, 0.3, gs);
        let p = walk_endpoint_distribution(&g, 0, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<f64> = p.iter().map(|&x| x + rng.random_range(-eta..=eta)).collect();
        let truth = direct_discrepancy(&g, &p);
        let err = (discrepancy_from_estimates(&g, &noisy) - truth).abs();
        prop_assert!(err <= 3.0 * n as f64 * eta * truth.sqrt().max(1.0));
    }

    #[test]
    fn verdict_is_and_of_outputs(n in 2usize..14, gs in any::<u64>(), seed in any::<u64>(), phi in 0.1f64..0.9) {
        let g = connected_graph(n, 0.4, gs);
        let cfg = TesterConfig { phi, seed, walk_length: Some(12), accept_threshold: AcceptThreshold::Mixing, ..TesterConfig::default() };
        let run = run_tester(&g, &cfg, false).unwrap();
        let and = run.output_bits.iter().all(|&b| b);
        prop_assert_eq!(run.verdict.decision, and);
        prop_assert_eq!(run.verdict.decision, run.verdict.reject_reason.is_none());
    }

    #[test]
    fn completeness_on_well_connected_graphs(n in 3usize..12, gs in any::<u64>(), seed in any::<u64>()) {
        let g = connected_graph(n, 0.8, gs);
        let phi = graph_conductance_bruteforce(&g).unwrap().value;
        // Keep the cap unreachable so only the walk statistics matter.
        let cfg = TesterConfig {
            phi,
            seed,
            walk_length: Some(20),
            set_cap: Some(n),
            accept_threshold: AcceptThreshold::Mixing,
            reject_threshold: condtest_core::protocols::RejectThreshold::Value(1e-300),
            ..TesterConfig::default()
        };
        let v = run_tester(&g, &cfg, false).unwrap().verdict;
        prop_assert!(v.decision, "{:?}", v);
    }

    #[test]
    fn exploration_is_never_wrong(n in 1usize..24, p in 0.0f64..0.5, gs in any::<u64>(), phi in 0.05f64..1.0) {
        let g = connected_graph(n, p, gs);
        match unknown_size_explore(&g, phi).unwrap().result {
            ExploreResult::Size(k) => prop_assert_eq!(k, n),
            ExploreResult::Reject => {}
        }
        let split = disjoint_union(&[g.clone(), connected_graph(3, 1.0, gs)]);
        prop_assert_eq!(unknown_size_explore(&split, phi).unwrap().result, ExploreResult::Reject);
    }
}

#[test]
fn tester_is_deterministic_in_both_modes() {
    let g = barbell(6);
    for mode in [WalkMode::Exact, WalkMode::Sampled] {
        let cfg = TesterConfig { mode, walk_count: 20_000, seed: 11, ..TesterConfig::default() };
        let a = run_tester(&g, &cfg, true).unwrap();
        let b = run_tester(&g, &cfg, true).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.estimates, b.estimates);
        assert_eq!(a.traces, b.traces);
    }
}

#[test]
fn k2_one_step_sum_is_zero() {
    let r = random_walk_phase(&path(2), &VertexSet::new(vec![0]), &WalkParams::exact(1)).unwrap();
    assert_eq!(r.discrepancy, vec![0.0]);
}

#[test]
fn explore_examples() {
    assert_eq!(unknown_size_explore(&complete(4), 0.5).unwrap().result, ExploreResult::Size(4));
    let two = disjoint_union(&[complete(4), complete(4)]);
    assert_eq!(unknown_size_explore(&two, 0.5).unwrap().result, ExploreResult::Reject);
    if let ExploreResult::Size(k) = unknown_size_explore(&cycle(16), 0.5).unwrap().result {
        assert_eq!(k, 16);
    }
}
