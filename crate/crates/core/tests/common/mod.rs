#![allow(dead_code)]

use palette_core::{Palette, ThreeGraph};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn random_palette(rng: &mut ChaCha8Rng, c: usize, p: f64) -> Palette {
    let mut pats = Vec::new();
    for a in 0..c as u32 {
        for b in 0..c as u32 {
            for d in 0..c as u32 {
                if rng.random_bool(p) {
                    pats.push([a, b, d]);
                }
            }
        }
    }
    Palette::new(c, pats).unwrap()
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> ThreeGraph {
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            for c in b + 1..n as u32 {
                if rng.random_bool(p) {
                    edges.push([a, b, c]);
                }
            }
        }
    }
    ThreeGraph::new(n, edges).unwrap()
}

fn orders(prefix: &mut Vec<u32>, left: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if left.is_empty() {
        out.push(prefix.clone());
        return;
    }
    for i in 0..left.len() {
        let v = left.remove(i);
        prefix.push(v);
        orders(prefix, left, out);
        prefix.pop();
        left.insert(i, v);
    }
}

/// Every ordering times every coloring of the shadow.
pub fn brute_paints(p: &Palette, f: &ThreeGraph) -> bool {
    if f.edge_count() == 0 {
        return true;
    }
    let c = p.color_count();
    if c == 0 {
        return false;
    }
    let n = f.vertex_count();
    let shadow = f.shadow();
    let mut all = Vec::new();
    orders(&mut Vec::new(), &mut (0..n as u32).collect(), &mut all);
    let total = (c as u64).pow(shadow.len() as u32);
    for ord in all {
        let mut pos = vec![0usize; n];
        for (i, &v) in ord.iter().enumerate() {
            pos[v as usize] = i;
        }
        for code in 0..total {
            let mut colors = std::collections::HashMap::new();
            let mut x = code;
            for &pr in &shadow {
                colors.insert(pr, (x % c as u64) as u32);
                x /= c as u64;
            }
            let col = |a: u32, b: u32| colors[&[a.min(b), a.max(b)]];
            let ok = f.edges().iter().all(|e| {
                let mut e = *e;
                e.sort_by_key(|&v| pos[v as usize]);
                p.contains(&[col(e[0], e[1]), col(e[0], e[2]), col(e[1], e[2])])
            });
            if ok {
                return true;
            }
        }
    }
    false
}

/// Random palette with pattern probability drawn from `lo..hi`.
pub fn rand_palette(rng: &mut ChaCha8Rng, c: usize, lo: f64, hi: f64) -> Palette {
    let p = rng.random_range(lo..hi);
    random_palette(rng, c, p)
}

pub fn rand_graph(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> ThreeGraph {
    let p = rng.random_range(lo..hi);
    random_graph(rng, n, p)
}

pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        ..Default::default()
    }
}
