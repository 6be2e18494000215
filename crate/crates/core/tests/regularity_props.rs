mod common;

use common::{random_palette, rng};
use palette_core::regularity::{
    clean, energy, eps_regular_audit, regularize, regularize_from, sample_model_sets, split_energy, tri_energy,
    triple_density, Audit, AuditOptions, ModelOptions, RegularizeOptions,
};
use palette_core::{Palette, Partition};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Splits each part of `a` into random nonempty pieces.
fn random_refinement(a: &Partition, seed: u64) -> Partition {
    let mut r = rng(seed);
    let mut parts = Vec::new();
    for set in a.parts() {
        let mut s = set.clone();
        s.shuffle(&mut r);
        let k = r.random_range(1..=s.len().min(3));
        let cut = s.len() / k;
        for i in 0..k {
            let end = if i + 1 == k { s.len() } else { (i + 1) * cut };
            parts.push(s[i * cut..end].to_vec());
        }
    }
    let mut exc = a.exceptional().to_vec();
    if !parts.is_empty() && r.random_bool(0.3) {
        let last = parts.last_mut().unwrap();
        if last.len() > 1 {
            exc.push(last.pop().unwrap());
        }
    }
    Partition::new(a.universe(), parts, exc).unwrap()
}

fn structured(seed: u64, n: usize) -> Palette {
    let mut r = rng(seed);
    let label: Vec<usize> = (0..n).map(|_| r.random_range(0..2)).collect();
    let dens: Vec<f64> = (0..8).map(|_| r.random::<f64>()).collect();
    let mut pats = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if r.random_bool(dens[label[a] * 4 + label[b] * 2 + label[c]]) {
                    pats.push([a as u32, b as u32, c as u32]);
                }
            }
        }
    }
    Palette::new(n, pats).unwrap()
}

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn energy_bounded_and_monotone(s in any::<u64>(), n in 3usize..16, t in 1usize..4) {
        let p = random_palette(&mut rng(s), n, 0.4);
        let a = Partition::balanced(n, t.min(n)).unwrap();
        let b = random_refinement(&a, s ^ 3);
        let (qa, qb) = (energy(&p, &a).unwrap(), energy(&p, &b).unwrap());
        prop_assert!((0.0..=1.0).contains(&qa) && (0.0..=1.0).contains(&qb));
        prop_assert!(qb >= qa - 1e-12);
        prop_assert!((tri_energy(&p, [&a, &a, &a]).unwrap() - qa).abs() < 1e-15);
    }

    #[test]
    fn witnesses_raise_energy(s in any::<u64>()) {
        let p = structured(s, 24);
        let v: Vec<u32> = (0..24).collect();
        let eps = 0.2;
        let rep = eps_regular_audit(&p, [&v, &v, &v], eps, &AuditOptions { samples: 100, seed: s, exhaustive_limit: 12 }).unwrap();
        if let Audit::Irregular { witness } = rep.audit {
            prop_assert!(witness.verify(&p, [&v, &v, &v], eps));
            let w = [&witness.sets[0][..], &witness.sets[1][..], &witness.sets[2][..]];
            let d = triple_density(&p, &v, &v, &v).unwrap();
            let after = split_energy(&p, [&v, &v, &v], w).unwrap();
            prop_assert!(after >= d * d + eps.powi(5) - 1e-12);
        }
    }

    #[test]
    fn regularity_is_monotone_in_epsilon(s in any::<u64>(), lo in 0.1f64..0.5, hi in 0.5f64..0.95) {
        let p = random_palette(&mut rng(s), 12, 0.5);
        let v: [Vec<u32>; 3] = [(0..4).collect(), (4..8).collect(), (8..12).collect()];
        let v = [&v[0][..], &v[1][..], &v[2][..]];
        let exact = AuditOptions { samples: 0, seed: 0, exhaustive_limit: 12 };
        let tight = eps_regular_audit(&p, v, lo, &exact).unwrap().audit;
        let loose = eps_regular_audit(&p, v, hi, &exact).unwrap().audit;
        prop_assert!(tight != Audit::NoWitnessFound && loose != Audit::NoWitnessFound);
        if tight == Audit::Regular {
            prop_assert_eq!(loose.clone(), Audit::Regular);
        }
        if let Audit::Irregular { witness } = loose {
            prop_assert!(witness.verify(&p, v, lo));
        }
    }

    #[test]
    fn audit_is_seed_deterministic(s in any::<u64>()) {
        let p = structured(s, 30);
        let v: Vec<u32> = (0..30).collect();
        let o = AuditOptions { samples: 40, seed: s, exhaustive_limit: 6 };
        prop_assert_eq!(eps_regular_audit(&p, [&v, &v, &v], 0.25, &o).unwrap(), eps_regular_audit(&p, [&v, &v, &v], 0.25, &o).unwrap());
    }
}

#[test]
fn density_closeness_on_small_energy_gap() {
    let eps: f64 = 0.3;
    let n = 24;
    for s in 0..20 {
        let mut r = rng(s);
        let a = Partition::balanced(n, 3).unwrap();
        let owner = a.labels();
        let on: Vec<bool> = (0..27).map(|_| r.random_bool(0.5)).collect();
        let mut pats = Vec::new();
        for x in 0..n as u32 {
            for y in 0..n as u32 {
                for z in 0..n as u32 {
                    let [i, j, k] = [x, y, z].map(|v| owner[v as usize].unwrap());
                    if on[i * 9 + j * 3 + k] {
                        pats.push([x, y, z]);
                    }
                }
            }
        }
        let p = Palette::new(n, pats).unwrap();
        let b = random_refinement(&a, s);
        let gap = energy(&p, &b).unwrap() - energy(&p, &a).unwrap();
        assert!(gap.abs() <= eps.powi(4) / 64.0, "seed {s}: gap {gap}");
        for ci in b.parts() {
            for cj in b.parts() {
                for ck in b.parts() {
                    let [i, j, k] = [ci, cj, ck].map(|c| owner[c[0] as usize].unwrap());
                    let d = triple_density(&p, &a.parts()[i], &a.parts()[j], &a.parts()[k]).unwrap();
                    assert!((triple_density(&p, ci, cj, ck).unwrap() - d).abs() <= eps);
                }
            }
        }
    }
}

#[test]
fn regularize_is_deterministic_and_sound() {
    let p = structured(5, 40);
    let mut o = RegularizeOptions::new(0.25, 2);
    o.seed = 9;
    let a = regularize(&p, &o).unwrap();
    let b = regularize(&p, &o).unwrap();
    assert_eq!(a, b);
    assert!(a.equipartition().is_ok());
    for it in &a.irregular_triples {
        let v = it.triple.map(|i| &a.partition.parts()[i][..]);
        assert!(it.witness.verify(&p, v, 0.25));
    }
    assert!(a.energy_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn model_sets_on_regularized_output() {
    let p = random_palette(&mut rng(77), 60, 0.3);
    let coarse = regularize(&p, &RegularizeOptions::new(0.3, 3)).unwrap().partition;
    let fine = regularize_from(&p, coarse.clone(), &RegularizeOptions::new(0.3, 3), true).unwrap().partition;
    let mut o = ModelOptions::new(0.3, 0.3);
    o.seed = 4;
    let m = sample_model_sets(&p, &coarse, &fine, &o).unwrap();
    assert!(m.passed, "{m:?}");
    assert!(m.attempts <= 100);
    assert_eq!(m, sample_model_sets(&p, &coarse, &fine, &o).unwrap());
    for (u, v) in m.sets.iter().zip(coarse.parts()) {
        assert!(u.iter().all(|x| v.contains(x)));
    }
}

#[test]
fn cleaning_buckets_hold() {
    for s in 0..10 {
        let p = structured(s, 30);
        let coarse = Partition::balanced(30, 5).unwrap();
        let mut r = rng(s);
        let model: Vec<Vec<u32>> = coarse
            .parts()
            .iter()
            .map(|v| {
                let mut v = v.clone();
                v.shuffle(&mut r);
                v.truncate(3);
                v.sort_unstable();
                v
            })
            .collect();
        let rep = clean(&p, &coarse, &model, 0.9).unwrap();
        assert!(rep.repeated.holds && rep.inaccurate.holds && rep.sparse.holds);
        assert!(rep.class_map_is_homomorphism);
        assert_eq!(rep.removed as usize, p.pattern_count() - rep.cleaned.pattern_count());
        let n3 = 30f64.powi(3);
        assert!(rep.removed as f64 <= rep.repeated.bound + rep.inaccurate.bound + rep.sparse.bound);
        assert!(rep.sparse.removed as f64 <= 4.0 * 0.9 / 9.0 * n3);
    }
    let p = Palette::full(6);
    let coarse = Partition::balanced(6, 3).unwrap();
    assert!(clean(&p, &coarse, &[vec![0], vec![], vec![4]], 1.0).is_err());
}
