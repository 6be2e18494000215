//! Weak regularity for palettes: ordered triple densities, ε-regularity
//! audits, the energy `q` and an iterated refinement loop.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::is_homomorphism;
use crate::palette::Palette;
use crate::partition::{Equipartition, Partition};

/// Default part size up to which audits enumerate every subset.
pub const EXHAUSTIVE_PART_LIMIT: usize = 12;

fn nonempty(sets: [&[u32]; 3]) -> Result<()> {
    if sets.iter().any(|s| s.is_empty()) {
        return Err(Error::EmptySet("triple density needs nonempty sets".into()));
    }
    Ok(())
}

/// Number of patterns in `W1 × W2 × W3`.
pub fn triple_count(p: &Palette, w1: &[u32], w2: &[u32], w3: &[u32]) -> u64 {
    if w1.len() * w2.len() * w3.len() < p.pattern_count() {
        let mut e = 0;
        for &a in w1 {
            for &b in w2 {
                e += w3.iter().filter(|&&c| p.contains(&[a, b, c])).count() as u64;
            }
        }
        return e;
    }
    let c = p.color_count();
    let mask = |w: &[u32]| {
        let mut m = vec![false; c];
        for &x in w {
            if let Some(slot) = m.get_mut(x as usize) {
                *slot = true;
            }
        }
        m
    };
    let (m1, m2, m3) = (mask(w1), mask(w2), mask(w3));
    p.patterns()
        .iter()
        .filter(|&&[a, b, d]| m1[a as usize] && m2[b as usize] && m3[d as usize])
        .count() as u64
}

/// `|(W1 × W2 × W3) ∩ P| / (|W1||W2||W3|)`, order-sensitive.
pub fn triple_density(p: &Palette, w1: &[u32], w2: &[u32], w3: &[u32]) -> Result<f64> {
    nonempty([w1, w2, w3])?;
    let e = triple_count(p, w1, w2, w3);
    Ok(e as f64 / (w1.len() * w2.len() * w3.len()) as f64)
}

/// Smallest admissible witness size `⌈ε|V|⌉` (at least one).
pub fn witness_size(epsilon: f64, len: usize) -> usize {
    ((epsilon * len as f64 - 1e-12).ceil() as usize).clamp(1, len.max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub sets: [Vec<u32>; 3],
    pub density: f64,
    pub base_density: f64,
}

impl Witness {
    /// Recomputes both densities and checks the size and deviation conditions.
    pub fn verify(&self, p: &Palette, v: [&[u32]; 3], epsilon: f64) -> bool {
        let sized = (0..3).all(|i| {
            let w = &self.sets[i];
            w.len() >= witness_size(epsilon, v[i].len()) && w.iter().all(|x| v[i].contains(x))
        });
        if !sized {
            return false;
        }
        let dw = triple_density(p, &self.sets[0], &self.sets[1], &self.sets[2]);
        let dv = triple_density(p, v[0], v[1], v[2]);
        matches!((dw, dv), (Ok(a), Ok(b)) if (a - b).abs() > epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Audit {
    Irregular { witness: Witness },
    /// Every admissible sub-triple was checked.
    Regular,
    /// Sampling found no witness; evidence only.
    NoWitnessFound,
}

impl Audit {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Audit::Irregular { witness } => Some(witness),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub samples: usize,
    pub seed: u64,
    pub exhaustive_limit: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            samples: 200,
            seed: 0,
            exhaustive_limit: EXHAUSTIVE_PART_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub audit: Audit,
    /// Number of `(W1, W2)` pairs examined.
    pub examined: u64,
}

/// Membership of `V1 × V2 × V3` in `P` as a dense tensor.
struct Tensor {
    d: [usize; 3],
    bits: Vec<u8>,
    total: u64,
}

impl Tensor {
    fn new(p: &Palette, v: [&[u32]; 3]) -> Tensor {
        let d = [v[0].len(), v[1].len(), v[2].len()];
        if d[0] * d[1] * d[2] < p.pattern_count() {
            let mut bits = Vec::with_capacity(d[0] * d[1] * d[2]);
            for &a in v[0] {
                for &b in v[1] {
                    bits.extend(v[2].iter().map(|&c| u8::from(p.contains(&[a, b, c]))));
                }
            }
            let total = bits.iter().map(|&x| x as u64).sum();
            return Tensor { d, bits, total };
        }
        let mut index: [HashMap<u32, usize>; 3] = Default::default();
        for i in 0..3 {
            index[i] = v[i].iter().enumerate().map(|(k, &x)| (x, k)).collect();
        }
        let mut bits = vec![0u8; d[0] * d[1] * d[2]];
        let mut total = 0;
        for &[a, b, c] in p.patterns() {
            if let (Some(&i), Some(&j), Some(&k)) = (index[0].get(&a), index[1].get(&b), index[2].get(&c)) {
                bits[(i * d[1] + j) * d[2] + k] = 1;
                total += 1;
            }
        }
        Tensor { d, bits, total }
    }

    fn at(&self, a: usize, b: usize, c: usize) -> u8 {
        self.bits[(a * self.d[1] + b) * self.d[2] + c]
    }

    fn base(&self) -> f64 {
        self.total as f64 / (self.d[0] * self.d[1] * self.d[2]) as f64
    }

    /// `z[c] = #{(a,b) ∈ W1 × W2 : (a,b,c) ∈ P}`.
    fn profile(&self, w1: &[usize], w2: &[usize]) -> Vec<u32> {
        let mut z = vec![0u32; self.d[2]];
        for &a in w1 {
            for &b in w2 {
                for (c, zc) in z.iter_mut().enumerate() {
                    *zc += u32::from(self.at(a, b, c));
                }
            }
        }
        z
    }
}

/// Given W1, W2 and the profile `z`, the extreme W3 of each size is a
/// top or bottom segment of `z`. Returns local indices of a violating W3.
fn best_third(z: &[u32], n1: usize, n2: usize, k3: usize, base: f64, epsilon: f64) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[b].cmp(&z[a]).then(a.cmp(&b)));
    let total: u64 = z.iter().map(|&x| x as u64).sum();
    let mut top = 0u64;
    let mut prefix = Vec::with_capacity(z.len() + 1);
    prefix.push(0u64);
    for &c in &order {
        top += z[c] as u64;
        prefix.push(top);
    }
    let pairs = (n1 * n2) as f64;
    for s in k3..=z.len() {
        let denom = pairs * s as f64;
        if prefix[s] as f64 / denom - base > epsilon {
            return Some(order[..s].to_vec());
        }
        let bottom = total - prefix[z.len() - s];
        if base - bottom as f64 / denom > epsilon {
            return Some(order[z.len() - s..].to_vec());
        }
    }
    None
}

fn to_global(v: &[u32], local: &[usize]) -> Vec<u32> {
    let mut w: Vec<u32> = local.iter().map(|&i| v[i]).collect();
    w.sort_unstable();
    w
}

fn bits_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// Searches for `W_i ⊆ V_i` with `|W_i| ≥ ⌈ε|V_i|⌉` and
/// `|d(W1,W2,W3) − d(V1,V2,V3)| > ε`.
pub fn eps_regular_audit(
    p: &Palette,
    v: [&[u32]; 3],
    epsilon: f64,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    nonempty(v)?;
    let t = Tensor::new(p, v);
    let base = t.base();
    let k = [0, 1, 2].map(|i| witness_size(epsilon, v[i].len()));
    let make = |l1: &[usize], l2: &[usize], l3: &[usize]| {
        let sets = [to_global(v[0], l1), to_global(v[1], l2), to_global(v[2], l3)];
        let density = triple_density(p, &sets[0], &sets[1], &sets[2]).expect("nonempty");
        Witness {
            sets,
            density,
            base_density: base,
        }
    };
    let mut examined = 0u64;
    let exhaustive = v.iter().all(|s| s.len() <= opts.exhaustive_limit.min(20));
    if exhaustive {
        let (d0, d1, d2) = (t.d[0], t.d[1], t.d[2]);
        for m1 in 1u32..1 << d0 {
            if (m1.count_ones() as usize) < k[0] {
                continue;
            }
            let l1 = bits_of(m1);
            // row[b][c] summed over W1
            let mut row = vec![0u32; d1 * d2];
            for &a in &l1 {
                for b in 0..d1 {
                    for c in 0..d2 {
                        row[b * d2 + c] += u32::from(t.at(a, b, c));
                    }
                }
            }
            let mut z = vec![0u32; d2];
            let mut gray = 0u32;
            for step in 1u32..1 << d1 {
                let flip = step.trailing_zeros() as usize;
                gray ^= 1 << flip;
                let adding = gray >> flip & 1 == 1;
                for c in 0..d2 {
                    if adding {
                        z[c] += row[flip * d2 + c];
                    } else {
                        z[c] -= row[flip * d2 + c];
                    }
                }
                let n2 = gray.count_ones() as usize;
                if n2 < k[1] {
                    continue;
                }
                examined += 1;
                if let Some(l3) = best_third(&z, l1.len(), n2, k[2], base, epsilon) {
                    let w = make(&l1, &bits_of(gray), &l3);
                    if w.verify(p, v, epsilon) {
                        return Ok(AuditReport {
                            audit: Audit::Irregular { witness: w },
                            examined,
                        });
                    }
                }
            }
        }
        return Ok(AuditReport {
            audit: Audit::Regular,
            examined,
        });
    }
    let mut candidates: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    // degree-sorted prefixes
    let degree = |axis: usize| -> Vec<usize> {
        let mut deg = vec![0u64; t.d[axis]];
        for a in 0..t.d[0] {
            for b in 0..t.d[1] {
                for c in 0..t.d[2] {
                    if t.at(a, b, c) == 1 {
                        deg[[a, b, c][axis]] += 1;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..t.d[axis]).collect();
        order.sort_by(|&x, &y| deg[y].cmp(&deg[x]).then(x.cmp(&y)));
        order
    };
    let (o1, o2) = (degree(0), degree(1));
    for top1 in [true, false] {
        for top2 in [true, false] {
            let pick = |o: &[usize], k: usize, top: bool| -> Vec<usize> {
                if top {
                    o[..k].to_vec()
                } else {
                    o[o.len() - k..].to_vec()
                }
            };
            candidates.push((pick(&o1, k[0], top1), pick(&o2, k[1], top2)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.samples {
        let s1 = rng.random_range(k[0]..=t.d[0]);
        let s2 = rng.random_range(k[1]..=t.d[1]);
        let n1 = if rng.random_bool(0.5) { k[0] } else { s1 };
        let n2 = if rng.random_bool(0.5) { k[1] } else { s2 };
        let w1 = sample(&mut rng, t.d[0], n1).into_vec();
        let w2 = sample(&mut rng, t.d[1], n2).into_vec();
        candidates.push((w1, w2));
    }
    for (l1, l2) in candidates {
        examined += 1;
        let z = t.profile(&l1, &l2);
        if let Some(l3) = best_third(&z, l1.len(), l2.len(), k[2], base, epsilon) {
            let w = make(&l1, &l2, &l3);
            if w.verify(p, v, epsilon) {
                return Ok(AuditReport {
                    audit: Audit::Irregular { witness: w },
                    examined,
                });
            }
        }
    }
    Ok(AuditReport {
        audit: Audit::NoWitnessFound,
        examined,
    })
}

/// Block labels of a partition with the exceptional set split into
/// singletons; returns labels and block sizes.
fn blocks(part: &Partition) -> (Vec<usize>, Vec<usize>) {
    let mut label = vec![0usize; part.universe()];
    let mut sizes = Vec::new();
    for (i, set) in part.parts().iter().enumerate() {
        for &x in set {
            label[x as usize] = i;
        }
        sizes.push(set.len());
    }
    for &x in part.exceptional() {
        label[x as usize] = sizes.len();
        sizes.push(1);
    }
    (label, sizes)
}

/// `q(A1, A2, A3) = Σ |V1||V2||V3|/n³ · d²(V1,V2,V3)` with exceptional
/// sets treated as singletons.
pub fn tri_energy(p: &Palette, parts: [&Partition; 3]) -> Result<f64> {
    let n = p.color_count();
    for a in parts {
        if a.universe() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.universe(),
            });
        }
    }
    if n == 0 {
        return Ok(0.0);
    }
    let b = parts.map(blocks);
    let mut counts: HashMap<[usize; 3], u64> = HashMap::new();
    for &[x, y, z] in p.patterns() {
        *counts
            .entry([b[0].0[x as usize], b[1].0[y as usize], b[2].0[z as usize]])
            .or_default() += 1;
    }
    let n3 = (n as f64).powi(3);
    Ok(counts
        .iter()
        .map(|(&[i, j, k], &e)| {
            let vol = (b[0].1[i] * b[1].1[j] * b[2].1[k]) as f64;
            (e as f64) * (e as f64) / vol / n3
        })
        .sum())
}

pub fn energy(p: &Palette, part: &Partition) -> Result<f64> {
    tri_energy(p, [part, part, part])
}

/// `q(V1,V2,V3)` for a single triple of sets.
pub fn set_energy(p: &Palette, v: [&[u32]; 3]) -> Result<f64> {
    let n = p.color_count() as f64;
    let d = triple_density(p, v[0], v[1], v[2])?;
    Ok((v[0].len() * v[1].len() * v[2].len()) as f64 / n.powi(3) * d * d)
}

/// `q` of the two-piece splits of each `V_i` by `W_i`.
pub fn split_energy(p: &Palette, v: [&[u32]; 3], w: [&[u32]; 3]) -> Result<f64> {
    let n3 = (p.color_count() as f64).powi(3);
    let pieces: Vec<[Vec<u32>; 2]> = (0..3)
        .map(|i| {
            let (inside, outside): (Vec<u32>, Vec<u32>) = v[i].iter().partition(|x| w[i].contains(x));
            [inside, outside]
        })
        .collect();
    let mut q = 0.0;
    for a in &pieces[0] {
        for b in &pieces[1] {
            for c in &pieces[2] {
                if a.is_empty() || b.is_empty() || c.is_empty() {
                    continue;
                }
                let e = triple_count(p, a, b, c) as f64;
                q += e * e / (a.len() * b.len() * c.len()) as f64 / n3;
            }
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrregularTriple {
    pub triple: [usize; 3],
    pub witness: Witness,
}

/// Energy gain from splitting one witnessed triple by its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementCheck {
    pub round: usize,
    pub triple: [usize; 3],
    pub before: f64,
    pub after: f64,
    /// `ε⁵ |V1||V2||V3| / n³`.
    pub required: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// At most `ε t³` triples carried a witness.
    Regular,
    PartCap,
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizeOptions {
    pub epsilon: f64,
    pub m: usize,
    pub seed: u64,
    pub audit_samples: usize,
    pub max_parts: usize,
    /// Part size up to which audits inside the loop are exhaustive.
    pub exhaustive_limit: usize,
    /// Defaults to `⌈16/ε⁶⌉ + 1` when `None`.
    pub max_rounds: Option<usize>,
}

impl RegularizeOptions {
    pub fn new(epsilon: f64, m: usize) -> Self {
        RegularizeOptions {
            epsilon,
            m,
            seed: 0,
            audit_samples: 64,
            max_parts: 64,
            exhaustive_limit: 6,
            max_rounds: None,
        }
    }

    pub fn round_cap(&self) -> usize {
        self.max_rounds
            .unwrap_or_else(|| (16.0 / self.epsilon.powi(6)).ceil() as usize + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub partition: Partition,
    pub epsilon: f64,
    /// Witnessed triples of the final partition.
    pub irregular_triples: Vec<IrregularTriple>,
    pub audited_samples: u64,
    /// True when every audit of the final partition was exhaustive.
    pub exhaustive_audit: bool,
    /// Energy of the final partition after redistributing the exceptional set.
    pub energy: f64,
    /// Energy of each intermediate partition, exceptional set as singletons.
    pub energy_trace: Vec<f64>,
    pub increments: Vec<IncrementCheck>,
    pub rounds: usize,
    pub stop: StopReason,
    pub complete: bool,
}

impl RegularityCertificate {
    pub fn equipartition(&self) -> Result<Equipartition> {
        Equipartition::new(self.partition.clone())
    }
}

fn audit_all(
    p: &Palette,
    part: &Partition,
    epsilon: f64,
    samples: usize,
    exhaustive_limit: usize,
    seed: u64,
    round: usize,
) -> Result<(Vec<IrregularTriple>, u64, bool)> {
    let t = part.part_count();
    let triples: Vec<[usize; 3]> = (0..t)
        .flat_map(|i| (0..t).flat_map(move |j| (0..t).map(move |k| [i, j, k])))
        .collect();
    let results = triples
        .par_iter()
        .enumerate()
        .map(|(idx, &[i, j, k])| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((round as u64) << 32) | idx as u64);
            let opts = AuditOptions {
                samples,
                seed: rng.random(),
                exhaustive_limit,
            };
            let v = [&part.parts()[i][..], &part.parts()[j][..], &part.parts()[k][..]];
            eps_regular_audit(p, v, epsilon, &opts).map(|r| ([i, j, k], r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut examined = 0;
    let mut exhaustive = true;
    let mut irregular = Vec::new();
    for (triple, r) in results {
        examined += r.examined;
        match r.audit {
            Audit::Irregular { witness } => irregular.push(IrregularTriple { triple, witness }),
            Audit::NoWitnessFound => exhaustive = false,
            Audit::Regular => {}
        }
    }
    Ok((irregular, examined, exhaustive))
}

/// Splits each part by every witness set touching it.
fn atoms(part: &Partition, irregular: &[IrregularTriple]) -> Vec<Vec<u32>> {
    let mut cuts: Vec<Vec<&Vec<u32>>> = vec![Vec::new(); part.part_count()];
    for it in irregular {
        for (pos, &i) in it.triple.iter().enumerate() {
            cuts[i].push(&it.witness.sets[pos]);
        }
    }
    let mut out = Vec::new();
    for (i, set) in part.parts().iter().enumerate() {
        let mut groups: BTreeMap<Vec<bool>, Vec<u32>> = BTreeMap::new();
        for &x in set {
            let sig: Vec<bool> = cuts[i].iter().map(|w| w.binary_search(&x).is_ok()).collect();
            groups.entry(sig).or_default().push(x);
        }
        out.extend(groups.into_values());
    }
    out
}

/// Chops atoms into blocks of a common size, largest size first, subject to
/// the leftover and part-count limits.
fn rebalance(
    atoms: &[Vec<u32>],
    exceptional: &[u32],
    leftover_cap: f64,
    max_parts: usize,
) -> Option<(Vec<Vec<u32>>, Vec<u32>)> {
    let largest = atoms.iter().map(Vec::len).max().unwrap_or(0);
    let mut fallback = None;
    for b in (1..=largest).rev() {
        let parts: usize = atoms.iter().map(|a| a.len() / b).sum();
        if parts == 0 || parts > max_parts {
            continue;
        }
        let leftover: usize = atoms.iter().map(|a| a.len() % b).sum();
        if leftover as f64 <= leftover_cap {
            fallback = Some(b);
            break;
        }
        if fallback.is_none_or(|fb: usize| {
            let l: usize = atoms.iter().map(|a| a.len() % fb).sum();
            leftover < l
        }) {
            fallback = Some(b);
        }
    }
    let b = fallback?;
    let mut parts = Vec::new();
    let mut rest: Vec<u32> = exceptional.to_vec();
    for a in atoms {
        let full = a.len() / b * b;
        parts.extend(a[..full].chunks(b).map(<[u32]>::to_vec));
        rest.extend_from_slice(&a[full..]);
    }
    rest.sort_unstable();
    Some((parts, rest))
}

/// Hands out the exceptional set round-robin. With `coarse` labels, each
/// element only joins parts inside its own coarse part.
fn redistribute(part: &Partition, coarse: Option<&[Option<usize>]>) -> Result<Partition> {
    let mut parts = part.parts().to_vec();
    if parts.is_empty() {
        return Ok(part.clone());
    }
    match coarse {
        None => {
            let len = parts.len();
            for (i, &x) in part.exceptional().iter().enumerate() {
                parts[i % len].push(x);
            }
        }
        Some(label) => {
            let mut owners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, set) in parts.iter().enumerate() {
                if let Some(Some(c)) = set.first().map(|&x| label[x as usize]) {
                    owners.entry(c).or_default().push(i);
                }
            }
            let mut turn: BTreeMap<usize, usize> = BTreeMap::new();
            for &x in part.exceptional() {
                let c = label[x as usize]
                    .ok_or_else(|| Error::InvalidPartition("coarse partition has an exceptional set".into()))?;
                let list = owners
                    .get(&c)
                    .ok_or_else(|| Error::InvalidPartition(format!("coarse part {c} lost every fine part")))?;
                let k = turn.entry(c).or_default();
                parts[list[*k % list.len()]].push(x);
                *k += 1;
            }
        }
    }
    Partition::new(part.universe(), parts, Vec::new())
}

/// Iterated refinement until at most `ε t³` ordered triples carry a witness.
pub fn regularize(p: &Palette, opts: &RegularizeOptions) -> Result<RegularityCertificate> {
    let n = p.color_count();
    if opts.m == 0 || opts.m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= c(P), got m = {}", opts.m)));
    }
    regularize_from(p, Partition::balanced(n, opts.m)?, opts, false)
}

/// Runs the refinement loop from `start`. With `keep_within` set, the
/// exceptional set is redistributed inside the parts of `start`, so the
/// output refines `start`.
pub fn regularize_from(
    p: &Palette,
    start: Partition,
    opts: &RegularizeOptions,
    keep_within: bool,
) -> Result<RegularityCertificate> {
    let n = p.color_count();
    if start.universe() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: start.universe(),
        });
    }
    if !(opts.epsilon > 0.0 && opts.epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0,1)".into()));
    }
    let eps = opts.epsilon;
    let coarse = keep_within.then(|| start.labels());
    let cap = opts.round_cap();
    let mut current = start;
    let mut trace = Vec::new();
    let mut increments = Vec::new();
    let mut audited = 0u64;
    let mut rounds = 0;
    let stop = loop {
        trace.push(energy(p, &current)?);
        let t = current.part_count();
        let (irregular, examined, _) = audit_all(p, &current, eps, opts.audit_samples, opts.exhaustive_limit, opts.seed, rounds)?;
        audited += examined;
        if irregular.len() as f64 <= eps * (t as f64).powi(3) {
            break StopReason::Regular;
        }
        if rounds >= cap {
            break StopReason::IterationCap;
        }
        let n3 = (n as f64).powi(3);
        for it in &irregular {
            let v = it.triple.map(|i| &current.parts()[i][..]);
            let w = [&it.witness.sets[0][..], &it.witness.sets[1][..], &it.witness.sets[2][..]];
            let before = set_energy(p, v)?;
            let after = split_energy(p, v, w)?;
            let required = eps.powi(5) * (v[0].len() * v[1].len() * v[2].len()) as f64 / n3;
            increments.push(IncrementCheck {
                round: rounds,
                triple: it.triple,
                before,
                after,
                required,
                holds: after >= before + required - 1e-12,
            });
        }
        let pieces = atoms(&current, &irregular);
        let leftover_cap = n as f64 / 2f64.powi(t.min(60) as i32);
        let Some((parts, rest)) = rebalance(&pieces, current.exceptional(), leftover_cap, opts.max_parts) else {
            break StopReason::PartCap;
        };
        let next = Partition::new(n, parts, rest)?;
        if next.parts() == current.parts() && next.exceptional() == current.exceptional() {
            break StopReason::PartCap;
        }
        current = next;
        rounds += 1;
    };
    let final_part = redistribute(&current, coarse.as_deref())?;
    let (irregular, examined, exhaustive) =
        audit_all(p, &final_part, eps, opts.audit_samples, opts.exhaustive_limit, opts.seed, usize::MAX >> 33)?;
    Ok(RegularityCertificate {
        energy: energy(p, &final_part)?,
        partition: final_part,
        epsilon: eps,
        irregular_triples: irregular,
        audited_samples: audited + examined,
        exhaustive_audit: exhaustive,
        energy_trace: trace,
        increments,
        rounds,
        complete: stop == StopReason::Regular,
        stop,
    })
}

/// Checks that every part of `fine` lies inside one part of `coarse` and
/// returns, per coarse part, the indices of its fine cells.
pub fn cells_by_coarse(coarse: &Partition, fine: &Partition) -> Result<Vec<Vec<usize>>> {
    if coarse.universe() != fine.universe() {
        return Err(Error::DimensionMismatch {
            expected: coarse.universe(),
            got: fine.universe(),
        });
    }
    let label = coarse.labels();
    let mut cells = vec![Vec::new(); coarse.part_count()];
    for (j, set) in fine.parts().iter().enumerate() {
        let owner = set.first().and_then(|&x| label[x as usize]);
        let Some(i) = owner else {
            return Err(Error::InvalidPartition(format!("fine part {j} is empty or exceptional in the coarse partition")));
        };
        if set.iter().any(|&x| label[x as usize] != Some(i)) {
            return Err(Error::InvalidPartition(format!("fine part {j} crosses coarse parts")));
        }
        cells[i].push(j);
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Regularity required of every model triple.
    pub eps_model: f64,
    /// Allowed density deviation from the coarse triple.
    pub eps_accuracy: f64,
    pub retries: usize,
    pub seed: u64,
    pub audit: AuditOptions,
}

impl ModelOptions {
    pub fn new(eps_model: f64, eps_accuracy: f64) -> Self {
        ModelOptions {
            eps_model,
            eps_accuracy,
            retries: 100,
            seed: 0,
            audit: AuditOptions {
                samples: 32,
                seed: 0,
                exhaustive_limit: 6,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSets {
    pub sets: Vec<Vec<u32>>,
    /// Fine part chosen in each coarse part.
    pub chosen: Vec<usize>,
    pub attempts: usize,
    pub passed: bool,
    pub irregular: usize,
    pub inaccurate: usize,
    /// `min |U_i| / n`.
    pub min_fraction: f64,
}

/// Picks one fine cell per coarse part uniformly at random, retrying until
/// all model triples pass the regularity audit and at most `ε t³` of them
/// deviate from the coarse density by `ε` or more.
pub fn sample_model_sets(p: &Palette, coarse: &Partition, fine: &Partition, opts: &ModelOptions) -> Result<ModelSets> {
    let cells = cells_by_coarse(coarse, fine)?;
    if cells.iter().any(Vec::is_empty) {
        return Err(Error::InvalidPartition("a coarse part contains no fine part".into()));
    }
    let t = coarse.part_count();
    let n = p.color_count().max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<ModelSets> = None;
    for attempt in 1..=opts.retries.max(1) {
        let chosen: Vec<usize> = cells.iter().map(|c| c[rng.random_range(0..c.len())]).collect();
        let sets: Vec<Vec<u32>> = chosen.iter().map(|&j| fine.parts()[j].clone()).collect();
        let mut irregular = 0;
        let mut inaccurate = 0;
        for i in 0..t {
            for j in 0..t {
                for k in 0..t {
                    let u = [&sets[i][..], &sets[j][..], &sets[k][..]];
                    let v = [&coarse.parts()[i][..], &coarse.parts()[j][..], &coarse.parts()[k][..]];
                    let mut a = opts.audit;
                    a.seed = rng.random();
                    if eps_regular_audit(p, u, opts.eps_model, &a)?.audit.witness().is_some() {
                        irregular += 1;
                    }
                    let du = triple_density(p, u[0], u[1], u[2])?;
                    let dv = triple_density(p, v[0], v[1], v[2])?;
                    if (du - dv).abs() >= opts.eps_accuracy {
                        inaccurate += 1;
                    }
                }
            }
        }
        let passed = irregular == 0 && inaccurate as f64 <= opts.eps_accuracy * (t as f64).powi(3);
        let min_fraction = sets.iter().map(Vec::len).min().unwrap_or(0) as f64 / n as f64;
        let cand = ModelSets {
            sets,
            chosen,
            attempts: attempt,
            passed,
            irregular,
            inaccurate,
            min_fraction,
        };
        if passed {
            return Ok(cand);
        }
        let score = |m: &ModelSets| m.irregular + m.inaccurate;
        if best.as_ref().is_none_or(|b| score(&cand) < score(b)) {
            best = Some(cand);
        }
    }
    let mut b = best.expect("at least one attempt");
    b.attempts = opts.retries.max(1);
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub removed: u64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    /// Palette on the coarse part indices.
    pub reduced: Palette,
    pub cleaned: Palette,
    pub removed: u64,
    /// Index triples with a repeated index.
    pub repeated: Bucket,
    /// Distinct triples whose model density strays by more than `2α/9`.
    pub inaccurate: Bucket,
    /// Remaining triples with model density at most `2α/9`.
    pub sparse: Bucket,
    /// The coarse class map sends `cleaned` into `reduced`.
    pub class_map_is_homomorphism: bool,
}

/// Builds the reduced palette on `[t]` from model sets and deletes every
/// pattern whose class triple it misses.
pub fn clean(p: &Palette, coarse: &Partition, model: &[Vec<u32>], alpha: f64) -> Result<CleanReport> {
    let t = coarse.part_count();
    let n = p.color_count();
    if coarse.universe() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: coarse.universe(),
        });
    }
    if !coarse.exceptional().is_empty() {
        return Err(Error::InvalidPartition("cleaning needs a partition without exceptional set".into()));
    }
    if model.len() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            got: model.len(),
        });
    }
    for (i, u) in model.iter().enumerate() {
        if u.is_empty() {
            return Err(Error::EmptySet(format!("model set {i}")));
        }
        if u.iter().any(|x| coarse.parts()[i].binary_search(x).is_err()) {
            return Err(Error::InvalidPartition(format!("model set {i} leaves its part")));
        }
    }
    let thr = 2.0 * alpha / 9.0;
    let label: Vec<u32> = coarse
        .labels()
        .into_iter()
        .map(|l| l.expect("no exceptional set") as u32)
        .collect();
    // 0 keep, 1 repeated, 2 inaccurate, 3 sparse
    let mut status = vec![0u8; t * t * t];
    let mut reduced = Vec::new();
    for i in 0..t {
        for j in 0..t {
            for k in 0..t {
                let s = if i == j || i == k || j == k {
                    1
                } else {
                    let du = triple_density(p, &model[i], &model[j], &model[k])?;
                    let dv = triple_density(p, &coarse.parts()[i], &coarse.parts()[j], &coarse.parts()[k])?;
                    if (du - dv).abs() > thr {
                        2
                    } else if du <= thr {
                        3
                    } else {
                        reduced.push([i as u32, j as u32, k as u32]);
                        0
                    }
                };
                status[(i * t + j) * t + k] = s;
            }
        }
    }
    let mut removed = [0u64; 4];
    let mut kept = Vec::new();
    for &pat in p.patterns() {
        let [a, b, c] = pat.map(|x| label[x as usize] as usize);
        let s = status[(a * t + b) * t + c];
        removed[s as usize] += 1;
        if s == 0 {
            kept.push(pat);
        }
    }
    let reduced = Palette::new(t, reduced)?;
    let cleaned = Palette::new(n, kept)?;
    let smax = coarse.parts().iter().map(Vec::len).max().unwrap_or(0) as f64;
    let count = |s: u8| status.iter().filter(|&&x| x == s).count() as f64;
    let bucket = |removed: u64, bound: f64| Bucket {
        removed,
        bound,
        holds: removed as f64 <= bound + 1e-9,
    };
    let hom = is_homomorphism(&cleaned, &reduced, &label);
    Ok(CleanReport {
        repeated: bucket(removed[1], count(1) * smax.powi(3)),
        inaccurate: bucket(removed[2], count(2) * smax.powi(3)),
        sparse: bucket(removed[3], 2.0 * thr * (n as f64).powi(3)),
        removed: removed[1] + removed[2] + removed[3],
        reduced,
        cleaned,
        class_map_is_homomorphism: hom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pal(c: usize, ps: &[[u32; 3]]) -> Palette {
        Palette::new(c, ps.iter().copied()).unwrap()
    }

    #[test]
    fn density_order_sensitive() {
        let p = pal(3, &[[0, 1, 2]]);
        assert_eq!(triple_density(&p, &[0], &[1], &[2]).unwrap(), 1.0);
        assert_eq!(triple_density(&p, &[1], &[0], &[2]).unwrap(), 0.0);
        assert_eq!(triple_density(&Palette::full(3), &[0, 1], &[2], &[0, 2]).unwrap(), 1.0);
        assert!(triple_density(&p, &[], &[1], &[2]).is_err());
    }

    #[test]
    fn complete_and_empty_are_regular() {
        let v: Vec<u32> = (0..8).collect();
        for p in [Palette::full(8), Palette::empty(8)] {
            let r = eps_regular_audit(&p, [&v, &v, &v], 0.2, &AuditOptions::default()).unwrap();
            assert_eq!(r.audit, Audit::Regular);
        }
    }

    #[test]
    fn planted_half_split() {
        // three sides of 20; patterns only between the first halves
        let n = 60;
        let side = |s: u32| (s * 20..s * 20 + 20).collect::<Vec<u32>>();
        let (a, b, c) = (side(0), side(1), side(2));
        let mut pats = Vec::new();
        for &x in &a[..10] {
            for &y in &b[..10] {
                pats.extend(c[..10].iter().map(|&z| [x, y, z]));
            }
        }
        let p = Palette::new(n, pats).unwrap();
        let r = eps_regular_audit(&p, [&a, &b, &c], 0.4, &AuditOptions::default()).unwrap();
        let w = r.audit.witness().expect("witness");
        assert!(w.verify(&p, [&a, &b, &c], 0.4));
        assert!((w.density - w.base_density).abs() > 0.4);
    }

    #[test]
    fn energy_single_part() {
        let p = pal(3, &[[0, 1, 2], [1, 1, 1]]);
        let one = Partition::balanced(3, 1).unwrap();
        let d = 2.0 / 27.0;
        assert!((energy(&p, &one).unwrap() - d * d).abs() < 1e-15);
        assert_eq!(energy(&Palette::empty(3), &one).unwrap(), 0.0);
    }

    #[test]
    fn full_palette_regular_at_once() {
        let cert = regularize(&Palette::full(10), &RegularizeOptions::new(0.3, 2)).unwrap();
        assert_eq!((cert.rounds, cert.stop), (0, StopReason::Regular));
        assert!(cert.irregular_triples.is_empty());
        let cert = regularize(&Palette::empty(10), &RegularizeOptions::new(0.3, 2)).unwrap();
        assert_eq!(cert.rounds, 0);
    }

    #[test]
    fn clean_extreme_threshold() {
        let p = Palette::full(6);
        let coarse = Partition::balanced(6, 3).unwrap();
        let r = clean(&p, &coarse, coarse.parts(), 4.5).unwrap();
        assert!(r.reduced.is_empty() && r.cleaned.is_empty());
        assert!(r.repeated.holds && r.inaccurate.holds && r.sparse.holds);
    }

    #[test]
    fn clean_keeps_cross_triples() {
        let p = Palette::full(6);
        let coarse = Partition::balanced(6, 3).unwrap();
        let r = clean(&p, &coarse, coarse.parts(), 0.5).unwrap();
        assert_eq!(r.reduced.pattern_count(), 6);
        assert_eq!(r.cleaned.pattern_count(), 6 * 8);
        assert_eq!(r.repeated.removed, 216 - 48);
        assert!(r.class_map_is_homomorphism);
    }

    #[test]
    fn model_sets_trivial_refinement() {
        let p = Palette::full(6);
        let coarse = Partition::balanced(6, 3).unwrap();
        let m = sample_model_sets(&p, &coarse, &coarse, &ModelOptions::new(0.3, 0.3)).unwrap();
        assert_eq!(m.sets, coarse.parts().to_vec());
        assert!(m.passed);
    }
}
