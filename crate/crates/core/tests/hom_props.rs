mod common;

use common::{random_palette, rng};
use palette_core::hom::{dominates, find_homomorphism, is_homomorphism, is_isomorphic};
use palette_core::lagrangian::{is_reduced, maximize_lagrangian, AscentOptions, Reducedness};
use palette_core::{Budget, Palette, Verdict};
use proptest::prelude::*;

fn found(q: &Palette, p: &Palette) -> Option<Vec<u32>> {
    find_homomorphism(q, p, Budget::DEFAULT).unwrap().outcome.found()
}

proptest! {
    #![proptest_config(common::config(96))]

    #[test]
    fn homomorphisms_compose(s in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut r = rng(s);
        let x = random_palette(&mut r, a, 0.2);
        let y = random_palette(&mut r, b, 0.5);
        let z = random_palette(&mut r, c, 0.7);
        if let (Some(f), Some(g)) = (found(&x, &y), found(&y, &z)) {
            let h: Vec<u32> = f.iter().map(|&i| g[i as usize]).collect();
            prop_assert!(is_homomorphism(&x, &z, &h));
        }
    }

    #[test]
    fn lagrangian_monotone_under_hom(s in any::<u64>(), a in 1usize..4, b in 1usize..4) {
        let mut r = rng(s);
        let q = random_palette(&mut r, a, 0.3);
        let p = random_palette(&mut r, b, 0.6);
        if found(&q, &p).is_some() {
            let opts = AscentOptions::default();
            let lq = maximize_lagrangian(&q, &opts).unwrap().value;
            let lp = maximize_lagrangian(&p, &opts).unwrap().value;
            prop_assert!(lq <= lp + 2.0 * opts.tol);
        }
    }

    #[test]
    fn reduced_palettes_have_no_domination(s in any::<u64>(), c in 2usize..4) {
        let p = random_palette(&mut rng(s), c, 0.3);
        prop_assume!(!p.is_empty());
        let rep = is_reduced(&p, 1e-6, &AscentOptions::default()).unwrap();
        if rep.verdict == Reducedness::Reduced && p.used_colors().len() == c {
            for a in 0..c as u32 {
                for b in 0..c as u32 {
                    if a != b {
                        prop_assert!(!dominates(&p, a, b).unwrap());
                    }
                }
            }
            if found(&p, &p.reverse()).is_some() {
                prop_assert_eq!(is_isomorphic(&p, &p.reverse(), Budget::DEFAULT).unwrap(), Verdict::Yes);
            }
        }
    }
}

#[test]
fn rainbow_is_reduced_and_not_self_reverse() {
    let p = Palette::new(3, [[0, 1, 2]]).unwrap();
    let rep = is_reduced(&p, 1e-6, &AscentOptions::default()).unwrap();
    assert_eq!(rep.verdict, Reducedness::Reduced);
    assert!(found(&p, &p.reverse()).is_some());
    assert_eq!(is_isomorphic(&p, &p.reverse(), Budget::DEFAULT).unwrap(), Verdict::Yes);
}
