mod common;

use common::connected_graph;
use condtest_core::edgelist::{parse_edgelist, to_edgelist};
use condtest_core::generate::{barbell, complete, cycle, generate, GraphKind};
use condtest_core::metrics::{cut_stats, diameter, graph_conductance_bruteforce, set_conductance};
use condtest_core::spectral::{
    conductance_bounds, direct_discrepancy, lazy_walk_step, mixing_upper_bound,
    normalized_walk_eigendecomposition, sparse_cut_partition, stationary_distribution,
    summed_discrepancy, verify_walk_decomposition, walk_endpoint_distribution,
};
use condtest_core::VertexSet;
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = condtest_core::Graph> {
    (2usize..12, 0.0f64..0.7, any::<u64>()).prop_map(|(n, p, s)| connected_graph(n, p, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ports_are_mutually_inverse(g in small_graph()) {
        for v in 0..g.n() {
            for p in 0..g.degree(v) {
                let u = g.neighbor(v, p);
                let back = g.reverse_port(v, p);
                prop_assert_eq!(g.neighbor(u, back), v);
                prop_assert_eq!(g.reverse_port(u, back), p);
            }
        }
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.m());
    }

    #[test]
    fn edgelist_round_trip(g in small_graph()) {
        prop_assert_eq!(parse_edgelist(&to_edgelist(&g)).unwrap(), g);
    }

    #[test]
    fn cut_is_symmetric(g in small_graph(), mask in any::<u64>()) {
        let s = VertexSet::from_mask(mask & ((1u64 << g.n()) - 1));
        let a = cut_stats(&g, &s).unwrap();
        let b = cut_stats(&g, &s.complement(g.n())).unwrap();
        prop_assert_eq!(a.cut_edges, b.cut_edges);
        prop_assert_eq!(a.vol_s, b.vol_complement);
    }

    #[test]
    fn bruteforce_is_a_minimum(g in small_graph(), mask in any::<u64>()) {
        let phi = graph_conductance_bruteforce(&g).unwrap();
        let s = VertexSet::from_mask(mask & ((1u64 << g.n()) - 1));
        if let Ok(x) = set_conductance(&g, &s) {
            let st = cut_stats(&g, &s).unwrap();
            if st.vol_s <= st.vol_complement {
                prop_assert!(phi.value <= x + 1e-15);
            }
        }
        prop_assert!((set_conductance(&g, &phi.witness).unwrap() - phi.value).abs() < 1e-15);
    }

    #[test]
    fn stationary_is_fixed_and_walks_stay_distributions(g in small_graph(), steps in 0usize..20) {
        let pi = stationary_distribution(&g).unwrap();
        let next = lazy_walk_step(&g, &pi);
        for (a, b) in pi.iter().zip(&next) {
            prop_assert!((a - b).abs() < 1e-15);
        }
        let p = walk_endpoint_distribution(&g, 0, steps).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn discrepancy_forms_agree(g in small_graph(), steps in 0usize..33) {
        for v in 0..g.n() {
            let p = walk_endpoint_distribution(&g, v, steps).unwrap();
            prop_assert!((summed_discrepancy(&g, &p) - direct_discrepancy(&g, &p)).abs() <= 1e-11);
        }
    }

    #[test]
    fn mixing_bound_and_diameter(g in small_graph(), steps in 1usize..65) {
        let phi = graph_conductance_bruteforce(&g).unwrap().value;
        let bound = mixing_upper_bound(phi, steps).unwrap();
        for v in 0..g.n() {
            let p = walk_endpoint_distribution(&g, v, steps).unwrap();
            prop_assert!(direct_discrepancy(&g, &p).sqrt() <= bound + 1e-12);
        }
        if g.m() >= 2 {
            let d = diameter(&g).finite().unwrap() as f64;
            prop_assert!(d <= 3.0 / phi * (g.m() as f64).ln());
        }
    }

    #[test]
    fn spectral_sandwich(g in small_graph()) {
        let phi = graph_conductance_bruteforce(&g).unwrap().value;
        let b = conductance_bounds(&g).unwrap();
        prop_assert!(b.lower <= phi + 1e-9);
        prop_assert!(phi <= b.upper + 1e-12);
    }

    #[test]
    fn decomposition_residual(g in small_graph(), steps in 0usize..17) {
        let dec = normalized_walk_eigendecomposition(&g).unwrap();
        prop_assert!(dec.orthonormality_error() < 1e-10);
        prop_assert!(verify_walk_decomposition(&g, &dec, steps).unwrap() <= 1e-9);
    }

    #[test]
    fn partition_respects_target(g in small_graph(), target in 0.0f64..0.6) {
        let part = sparse_cut_partition(&g, target).unwrap();
        prop_assert!(part.cut_p as f64 <= target * part.vol_p as f64 + 1e-12);
        prop_assert!(2 * part.vol_p <= 2 * g.m());
    }

    #[test]
    fn generators_are_seed_deterministic(seed in any::<u64>()) {
        let kind = GraphKind::RandomRegular { n: 20, d: 3 };
        prop_assert_eq!(generate(&kind, seed).unwrap(), generate(&kind, seed).unwrap());
    }
}

#[test]
fn named_families() {
    assert_eq!((barbell(4).n(), barbell(4).m()), (8, 13));
    assert_eq!(cycle(8).m(), 8);
    assert_eq!(complete(16).m(), 120);
    assert!("random-regular:7:3".parse::<GraphKind>().is_ok());
    assert!(generate(&"random-regular:7:3".parse().unwrap(), 0).is_err());
}
