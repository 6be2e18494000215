mod common;

use common::rng;
use palette_core::gadgets::{
    build_g_sigma, build_triangle_system, compatible_permutation, hypergraph_from_colored_graph, natural_painting,
    sigma_compatible, verify_gsigma_claim, OrderedGraph, Permutation,
};
use palette_core::{Budget, Palette};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn exactly_one_compatible_permutation(s in any::<u64>(), k in 2usize..6) {
        let mut r = rng(s);
        let n = k + 3;
        let mut rank: Vec<usize> = (0..n).collect();
        rank.shuffle(&mut r);
        let mut verts: Vec<u32> = (0..n as u32).collect();
        verts.shuffle(&mut r);
        let edge = &verts[..k];
        let hits = Permutation::all(k).into_iter().filter(|s| sigma_compatible(edge, s, &rank).unwrap()).count();
        prop_assert_eq!(hits, 1);
        prop_assert!(sigma_compatible(edge, &compatible_permutation(edge, &rank).unwrap(), &rank).unwrap());
    }

    #[test]
    fn colored_graph_is_painted_by_its_palette(s in any::<u64>(), n in 3usize..12, c in 1usize..4) {
        let mut r = rng(s);
        let q = common::random_palette(&mut r, c, 0.4);
        let mut edges = Vec::new();
        let mut labels = Vec::new();
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                if r.random_bool(0.6) {
                    edges.push([a, b]);
                    labels.push(r.random_range(0..c as u32));
                }
            }
        }
        let g = OrderedGraph::new(n, edges, Some(labels)).unwrap();
        let h = hypergraph_from_colored_graph(&g, &q).unwrap();
        prop_assert!(natural_painting(&g, &h).unwrap().verify(&q, &h));
    }

    #[test]
    fn triangle_system_is_a_matching(s in any::<u64>(), c in 1usize..4) {
        let q = common::random_palette(&mut rng(s), c, 0.4);
        prop_assume!(!q.is_empty());
        let g = build_triangle_system(&q).unwrap();
        let h = hypergraph_from_colored_graph(&g, &q).unwrap();
        prop_assert_eq!(h.edge_count(), q.pattern_count());
        let mut seen = vec![false; h.vertex_count()];
        for e in h.edges() {
            for &v in e {
                prop_assert!(!seen[v as usize]);
                seen[v as usize] = true;
            }
        }
        for color in 0..c as u32 {
            for e in g.class(color) {
                prop_assert_eq!(g.label(e[0], e[1]), Some(color));
            }
        }
    }
}

#[test]
fn identities_hold_for_all_small_sigma() {
    for k in 3..=5 {
        for s in Permutation::all(k) {
            if s.is_identity() || s.is_reversal() {
                assert!(build_g_sigma(&s).is_err());
                continue;
            }
            let g = build_g_sigma(&s).unwrap();
            assert!(g.satisfies_identities() && g.is_linear(), "{s}");
            assert_eq!(g.vertex_count, 3 * k - 3);
        }
    }
}

#[test]
fn claim_holds_for_every_sigma_in_s4() {
    for s in Permutation::all(4) {
        if s.is_identity() || s.is_reversal() {
            continue;
        }
        let g = build_g_sigma(&s).unwrap();
        let cert = verify_gsigma_claim(&g, Budget::UNLIMITED).unwrap().outcome.found().unwrap();
        assert_eq!((cert.orders, cert.counterexamples), (362_880, 0), "{s}");
    }
}

#[test]
fn large_claim_respects_budget() {
    let s: Permutation = "2,1,3,4,5".parse().unwrap();
    let g = build_g_sigma(&s).unwrap();
    assert!(verify_gsigma_claim(&g, Budget::DEFAULT).unwrap().outcome.found().is_none());
}

#[test]
fn identity_would_be_compatible() {
    let natural: Vec<usize> = (0..9).collect();
    let id = Permutation::identity(4);
    for e in [[0u32, 1, 3, 5], [2, 3, 4, 6], [1, 4, 7, 8]] {
        assert!(sigma_compatible(&e, &id, &natural).unwrap());
    }
    assert_eq!(Permutation::identity(3).to_string(), "1,2,3");
    assert!(hypergraph_from_colored_graph(&OrderedGraph::new(3, vec![[0, 1]], None).unwrap(), &Palette::full(1)).is_err());
}
