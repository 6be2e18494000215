mod common;

use common::{random_palette, rng};
use palette_core::extremal::{
    best_blowup_fit, ex_pal, g_nondegenerate, missing_bad, shape_check, small_three_graphs, Mode,
};
use palette_core::painting::is_family_deficient;
use palette_core::{Budget, Palette, ThreeGraph, Verdict};
use proptest::prelude::*;

proptest! {
    #![proptest_config(common::config(48))]

    #[test]
    fn deficiency_is_downward_closed(s in any::<u64>(), c in 1usize..4, drop in any::<u64>()) {
        let p = random_palette(&mut rng(s), c, 0.5);
        let fam = [ThreeGraph::k4_minus()];
        if is_family_deficient(&p, &fam, Budget::DEFAULT).unwrap() == Verdict::Yes {
            let sub = Palette::new(c, p.patterns().iter().enumerate().filter(|(i, _)| drop >> (i % 64) & 1 == 0).map(|(_, t)| *t)).unwrap();
            prop_assert_eq!(is_family_deficient(&sub, &fam, Budget::DEFAULT).unwrap(), Verdict::Yes);
        }
    }

    #[test]
    fn blowup_fit_is_exact_on_blowups(s in any::<u64>(), c in 1usize..3, sizes in proptest::collection::vec(1usize..3, 2)) {
        let p = random_palette(&mut rng(s), c, 0.5);
        let b = p.blow_up(&sizes[..c]).unwrap();
        let fit = best_blowup_fit(&b.palette, &p, Mode::Exhaustive).unwrap();
        prop_assert_eq!(fit.bad, 0);
        let mb = missing_bad(&b.palette, &p, &b.class_of).unwrap();
        prop_assert_eq!(mb.missing.len() + mb.bad.len(), 0);
    }
}

#[test]
fn extremal_values() {
    let exh = Mode::Exhaustive;
    let k4m = [ThreeGraph::k4_minus()];
    assert_eq!(g_nondegenerate(3, &k4m, exh, Budget::UNLIMITED).unwrap().ex_value, 3);
    assert_eq!(g_nondegenerate(4, &k4m, exh, Budget::UNLIMITED).unwrap().ex_value, 8);
    let k4 = [ThreeGraph::complete(4)];
    let r = ex_pal(2, &k4, exh, Budget::UNLIMITED).unwrap();
    assert_eq!((r.ex_value, r.extremal_palettes.len(), r.optimal), (4, 2, true));
    for p in &r.extremal_palettes {
        assert_eq!(is_family_deficient(p, &k4, Budget::DEFAULT).unwrap(), Verdict::Yes);
    }
    let edge = [ThreeGraph::new(3, [[0, 1, 2]]).unwrap()];
    assert_eq!(ex_pal(4, &edge, exh, Budget::UNLIMITED).unwrap().ex_value, 0);
    assert!(ex_pal(3, &[ThreeGraph::empty(3)], exh, Budget::UNLIMITED).is_err());
}

#[test]
fn small_graph_counts() {
    assert_eq!(small_three_graphs(3).len(), 1);
    assert_eq!(small_three_graphs(4).len(), 4);
}

#[test]
fn heuristic_is_a_lower_bound() {
    let fam = [ThreeGraph::k4_minus()];
    let exact = g_nondegenerate(4, &fam, Mode::Exhaustive, Budget::UNLIMITED).unwrap();
    let heur = g_nondegenerate(4, &fam, Mode::Heuristic { rounds: 20, seed: 1 }, Budget::UNLIMITED).unwrap();
    assert!(heur.ex_value <= exact.ex_value);
}

#[test]
fn rainbow_shape_check_reported() {
    let p = Palette::new(3, [[0, 1, 2]]).unwrap();
    let sc = shape_check(&p, &[2, 3], Budget::UNLIMITED).unwrap();
    for (rep, flags) in sc.reports.iter().zip(&sc.is_blowup) {
        println!("n = {}: ex = {}, blow-up flags {:?}", rep.n, rep.ex_value, flags);
        assert_eq!(flags.len(), rep.extremal_palettes.len());
    }
}
