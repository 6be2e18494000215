mod common;

use std::collections::{BTreeSet, HashMap};

use common::{brute_paints, random_graph, random_palette, rng};
use palette_core::painting::{count_paintings, find_painting, paints, shadow_linear};
use palette_core::{Budget, Palette, ThreeGraph, Verdict};
use proptest::prelude::*;

/// Colorings of the shadow for which some ordering works.
fn brute_count(p: &Palette, f: &ThreeGraph) -> u128 {
    let shadow = f.shadow();
    let c = p.color_count() as u64;
    let n = f.vertex_count();
    let mut total = 0;
    let mut perms = Vec::new();
    let mut v: Vec<u32> = (0..n as u32).collect();
    palette_core::palette::for_each_permutation(&mut v, &mut |o| perms.push(o.to_vec()));
    for code in 0..c.pow(shadow.len() as u32) {
        let mut x = code;
        let col: HashMap<[u32; 2], u32> = shadow
            .iter()
            .map(|&pr| {
                let k = (x % c) as u32;
                x /= c;
                (pr, k)
            })
            .collect();
        let ok = perms.iter().any(|o| {
            let mut pos = vec![0; n];
            o.iter().enumerate().for_each(|(i, &v)| pos[v as usize] = i);
            f.edges().iter().all(|e| {
                let mut e = *e;
                e.sort_by_key(|&v| pos[v as usize]);
                let k = |a: u32, b: u32| col[&[a.min(b), a.max(b)]];
                p.contains(&[k(e[0], e[1]), k(e[0], e[2]), k(e[1], e[2])])
            })
        });
        total += u128::from(ok);
    }
    total
}

proptest! {
    #![proptest_config(common::config(96))]

    #[test]
    fn witnesses_verify(seed in any::<u64>(), c in 1usize..4, n in 3usize..7) {
        let mut r = rng(seed);
        let p = random_palette(&mut r, c, 0.35);
        let f = random_graph(&mut r, n, 0.4);
        let rep = find_painting(&p, &f, Budget::DEFAULT).unwrap();
        if let Some(w) = rep.outcome.found() {
            prop_assert!(w.verify(&p, &f));
        }
    }

    #[test]
    fn monotone_in_patterns(seed in any::<u64>(), c in 1usize..4, n in 3usize..6) {
        let mut r = rng(seed);
        let p = random_palette(&mut r, c, 0.3);
        let extra = random_palette(&mut r, c, 0.3);
        let bigger = Palette::new(c, p.patterns().iter().chain(extra.patterns()).copied()).unwrap();
        let f = random_graph(&mut r, n, 0.5);
        if paints(&p, &f, Budget::DEFAULT).unwrap() == Verdict::Yes {
            prop_assert_eq!(paints(&bigger, &f, Budget::DEFAULT).unwrap(), Verdict::Yes);
        }
    }

    #[test]
    fn subgraph_closure(seed in any::<u64>(), c in 1usize..4, n in 3usize..6, keep in any::<u32>()) {
        let mut r = rng(seed);
        let p = random_palette(&mut r, c, 0.4);
        let f = random_graph(&mut r, n, 0.5);
        if let Some(w) = find_painting(&p, &f, Budget::DEFAULT).unwrap().outcome.found() {
            let mut i = 0;
            let sub = f.filter_edges(|_| { i += 1; keep >> (i % 32) & 1 == 1 });
            prop_assert!(w.restrict(&sub).verify(&p, &sub));
        }
    }

    #[test]
    fn count_positive_iff_paints(seed in any::<u64>(), c in 1usize..3, n in 3usize..5) {
        let mut r = rng(seed);
        let p = random_palette(&mut r, c, 0.4);
        let f = random_graph(&mut r, n, 0.5);
        let count = count_paintings(&p, &f, Budget::DEFAULT).unwrap().outcome.unwrap();
        prop_assert_eq!(count, brute_count(&p, &f));
        prop_assert_eq!(count >= 1, brute_paints(&p, &f));
    }

    #[test]
    fn shadow_linear_keeps_edges(seed in any::<u64>(), n in 0usize..8) {
        let f = random_graph(&mut rng(seed), n, 0.4);
        let l = shadow_linear(&f);
        prop_assert_eq!(l.edge_count(), f.edge_count());
        prop_assert!(l.is_linear());
    }
}

#[test]
fn rainbow_examples() {
    let rainbow = Palette::new(3, [[0, 1, 2]]).unwrap();
    let cherry = ThreeGraph::new(4, [[0, 1, 2], [0, 1, 3]]).unwrap();
    assert_eq!(paints(&rainbow, &cherry, Budget::DEFAULT).unwrap(), Verdict::Yes);
    assert_eq!(paints(&rainbow, &ThreeGraph::k4_minus(), Budget::DEFAULT).unwrap(), Verdict::No);
    let edge = ThreeGraph::new(3, [[0, 1, 2]]).unwrap();
    let n = count_paintings(&rainbow, &edge, Budget::DEFAULT).unwrap().outcome;
    assert_eq!(n, Some(6));
    let used: BTreeSet<u32> = rainbow.used_colors();
    assert_eq!(used.len(), 3);
}

#[test]
fn budget_exhaustion_is_unknown() {
    let p = Palette::full(2);
    let f = ThreeGraph::complete(6);
    let rep = find_painting(&p, &f, Budget(1)).unwrap();
    assert_eq!(rep.outcome.verdict(), Verdict::Unknown);
}
