//! Random palette constructions with density audits, and reduced 3-graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csp::{full_domain, Csp, Flow, Table, MAX_VALUES};
use crate::error::{Error, Result};
use crate::graph::{pair, Pair, ThreeGraph};
use crate::painting::Painting;
use crate::palette::Palette;
use crate::search::{Budget, Meter, Report, SearchOutcome};
use crate::weights::WeightVector;

/// Colors of all pairs `a < b` of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairColoring {
    pub n: usize,
    colors: Vec<u32>,
}

impl PairColoring {
    fn index(n: usize, a: usize, b: usize) -> usize {
        a * n - a * (a + 1) / 2 + (b - a - 1)
    }

    pub fn color(&self, a: u32, b: u32) -> u32 {
        let [a, b] = pair(a, b);
        self.colors[Self::index(self.n, a as usize, b as usize)]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.colors
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub graph: ThreeGraph,
    pub coloring: PairColoring,
}

impl Construction {
    /// The natural order with `χ` on the shadow.
    pub fn painting(&self) -> Painting {
        let coloring = self
            .graph
            .shadow()
            .into_iter()
            .map(|p| (p, self.coloring.color(p[0], p[1])));
        Painting::new((0..self.graph.vertex_count() as u32).collect(), coloring)
    }
}

/// Colors each pair `a < b` independently with `P(χ(ab) = i) = x_i` and
/// keeps the triples `a < b < c` with `(χ(ab), χ(ac), χ(bc)) ∈ P`.
///
/// Pair `ab` draws from ChaCha8 seeded with `seed` on stream `(a << 32) | b`,
/// so the coloring does not depend on thread count.
pub fn palette_construction(p: &Palette, x: &WeightVector, n: usize, seed: u64) -> Result<Construction> {
    if x.len() != p.color_count() {
        return Err(Error::DimensionMismatch {
            expected: p.color_count(),
            got: x.len(),
        });
    }
    if n < 3 {
        return Err(Error::InvalidArgument("construction needs n >= 3".into()));
    }
    let dist = WeightedIndex::new(x.as_slice()).map_err(|e| Error::InvalidWeights(e.to_string()))?;
    let colors: Vec<u32> = (0..n as u64)
        .into_par_iter()
        .flat_map_iter(|a| {
            let dist = &dist;
            (a + 1..n as u64).map(move |b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((a << 32) | b);
                dist.sample(&mut rng) as u32
            })
        })
        .collect();
    let coloring = PairColoring { n, colors };
    let edges: Vec<[u32; 3]> = (0..n as u32)
        .into_par_iter()
        .flat_map_iter(|a| {
            let coloring = &coloring;
            (a + 1..n as u32).flat_map(move |b| {
                (b + 1..n as u32)
                    .filter(move |&c| p.contains(&[coloring.color(a, b), coloring.color(a, c), coloring.color(b, c)]))
                    .map(move |c| [a, b, c])
            })
        })
        .collect();
    Ok(Construction {
        graph: ThreeGraph::new(n, edges)?,
        coloring,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    Exhaustive,
    Sampled,
}

/// Largest vertex count audited over all subsets by default.
pub const EXHAUSTIVE_AUDIT_LIMIT: usize = 18;
/// Hard cap for a requested exhaustive audit.
pub const EXHAUSTIVE_AUDIT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditStrategy {
    /// Exhaustive up to [`EXHAUSTIVE_AUDIT_LIMIT`] vertices, sampled beyond.
    #[default]
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityAudit {
    pub mode: AuditMode,
    /// No subset with `e(X) < d·C(|X|,3) − ηn³` was found.
    pub dense: bool,
    pub worst: Vec<u32>,
    /// `e(X) − d·C(|X|,3) + ηn³` at `worst`.
    pub worst_slack: f64,
    pub subsets_checked: u64,
}

fn binom3(s: usize) -> f64 {
    let s = s as f64;
    s * (s - 1.0) * (s - 2.0) / 6.0
}

fn count_in(h: &ThreeGraph, member: &[bool]) -> u64 {
    h.edges()
        .iter()
        .filter(|e| e.iter().all(|&v| member[v as usize]))
        .count() as u64
}

/// Checks `e(X) ≥ d·C(|X|,3) − ηn³`, either over every subset or over
/// random subsets on the size grid `⌈n/10⌉·k` plus a max-degree peel.
pub fn d_eta_density_audit(
    h: &ThreeGraph,
    d: f64,
    eta: f64,
    strategy: AuditStrategy,
    samples: usize,
    seed: u64,
) -> Result<DensityAudit> {
    let n = h.vertex_count();
    let exhaustive = match strategy {
        AuditStrategy::Auto => n <= EXHAUSTIVE_AUDIT_LIMIT,
        AuditStrategy::Sampled => false,
        AuditStrategy::Exhaustive if n > EXHAUSTIVE_AUDIT_CAP => {
            return Err(Error::TooLarge {
                what: "exhaustive density audit",
                limit: EXHAUSTIVE_AUDIT_CAP,
                got: n,
            })
        }
        AuditStrategy::Exhaustive => true,
    };
    let slack_at = |e: u64, s: usize| e as f64 - d * binom3(s) + eta * (n as f64).powi(3);
    if n == 0 {
        return Ok(DensityAudit {
            mode: AuditMode::Exhaustive,
            dense: true,
            worst: Vec::new(),
            worst_slack: slack_at(0, 0),
            subsets_checked: 1,
        });
    }
    if exhaustive {
        let masks: Vec<u32> = h.edges().iter().map(|e| e.iter().fold(0u32, |m, &v| m | 1 << v)).collect();
        let (slack, worst) = (0u32..1 << n)
            .into_par_iter()
            .map(|x| {
                let e = masks.iter().filter(|&&m| m & x == m).count() as u64;
                (slack_at(e, x.count_ones() as usize), x)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .expect("nonempty range");
        return Ok(DensityAudit {
            mode: AuditMode::Exhaustive,
            dense: slack >= 0.0,
            worst: (0..n as u32).filter(|v| worst >> v & 1 == 1).collect(),
            worst_slack: slack,
            subsets_checked: 1 << n,
        });
    }
    let step = n.div_ceil(10);
    let sizes: Vec<usize> = (1..=10).map(|k| (step * k).min(n)).collect();
    let trivial = |s: usize| d * binom3(s) - eta * (n as f64).powi(3) <= 0.0;
    let mut candidates: Vec<(f64, Vec<u32>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let s = sizes[i % sizes.len()];
            let x: Vec<u32> = sample(&mut rng, n, s).into_iter().map(|v| v as u32).collect();
            if trivial(s) {
                return (slack_at(0, s), x);
            }
            let mut member = vec![false; n];
            x.iter().for_each(|&v| member[v as usize] = true);
            (slack_at(count_in(h, &member), s), x)
        })
        .collect();
    // peel: drop the vertex of largest degree inside X, one at a time
    let mut member = vec![true; n];
    let mut deg = vec![0u64; n];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in h.edges().iter().enumerate() {
        for &v in e {
            deg[v as usize] += 1;
            incident[v as usize].push(i);
        }
    }
    let mut alive = vec![true; h.edge_count()];
    let mut e_count = h.edge_count() as u64;
    for s in (1..=n).rev() {
        let x: Vec<u32> = (0..n as u32).filter(|&v| member[v as usize]).collect();
        candidates.push((slack_at(e_count, s), x));
        let v = (0..n)
            .filter(|&v| member[v])
            .max_by_key(|&v| (deg[v], std::cmp::Reverse(v)))
            .expect("nonempty");
        member[v] = false;
        for &i in &incident[v] {
            if alive[i] {
                alive[i] = false;
                e_count -= 1;
                for &u in &h.edges()[i] {
                    deg[u as usize] -= 1;
                }
            }
        }
    }
    let checked = candidates.len() as u64;
    let (_, worst) = candidates
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("nonempty");
    let mut member = vec![false; n];
    worst.iter().for_each(|&v| member[v as usize] = true);
    let slack = slack_at(count_in(h, &member), worst.len());
    Ok(DensityAudit {
        mode: AuditMode::Sampled,
        dense: slack >= 0.0,
        worst,
        worst_slack: slack,
        subsets_checked: checked,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet {
    pub indices: [u32; 2],
    pub vertices: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constituent {
    pub indices: [u32; 3],
    /// Each edge is `(p, q, r)` with `p ∈ P^{ij}`, `q ∈ P^{ik}`, `r ∈ P^{jk}`.
    pub edges: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawReduced {
    t: usize,
    pair_sets: Vec<PairSet>,
    constituents: Vec<Constituent>,
}

/// Index set `0..t`, a vertex set for each index pair and a 3-partite
/// constituent for each index triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawReduced", into = "RawReduced")]
pub struct Reduced3Graph {
    t: usize,
    pair_sets: BTreeMap<[u32; 2], Vec<u32>>,
    constituents: BTreeMap<[u32; 3], BTreeSet<[u32; 3]>>,
}

impl TryFrom<RawReduced> for Reduced3Graph {
    type Error = Error;
    fn try_from(r: RawReduced) -> Result<Self> {
        Reduced3Graph::new(r.t, r.pair_sets, r.constituents)
    }
}

impl From<Reduced3Graph> for RawReduced {
    fn from(g: Reduced3Graph) -> Self {
        RawReduced {
            t: g.t,
            pair_sets: g
                .pair_sets
                .into_iter()
                .map(|(indices, vertices)| PairSet { indices, vertices })
                .collect(),
            constituents: g
                .constituents
                .into_iter()
                .map(|(indices, edges)| Constituent {
                    indices,
                    edges: edges.into_iter().collect(),
                })
                .collect(),
        }
    }
}

impl Reduced3Graph {
    pub fn new(t: usize, pair_sets: Vec<PairSet>, constituents: Vec<Constituent>) -> Result<Self> {
        let mut sets = BTreeMap::new();
        let mut owner: BTreeMap<u32, [u32; 2]> = BTreeMap::new();
        for ps in pair_sets {
            let [i, j] = ps.indices;
            if i >= j || j as usize >= t {
                return Err(Error::InvalidArgument(format!("bad index pair {:?}", ps.indices)));
            }
            let mut v = ps.vertices;
            v.sort_unstable();
            v.dedup();
            for &x in &v {
                if let Some(prev) = owner.insert(x, ps.indices) {
                    return Err(Error::InvalidArgument(format!("vertex {x} lies in {prev:?} and {:?}", ps.indices)));
                }
            }
            if sets.insert(ps.indices, v).is_some() {
                return Err(Error::InvalidArgument(format!("pair {:?} listed twice", ps.indices)));
            }
        }
        for i in 0..t as u32 {
            for j in i + 1..t as u32 {
                sets.entry([i, j]).or_default();
            }
        }
        let mut cons: BTreeMap<[u32; 3], BTreeSet<[u32; 3]>> = BTreeMap::new();
        for c in constituents {
            let [i, j, k] = c.indices;
            if !(i < j && j < k && (k as usize) < t) {
                return Err(Error::InvalidArgument(format!("bad index triple {:?}", c.indices)));
            }
            let entry = cons.entry(c.indices).or_default();
            for e in c.edges {
                let slots = [[i, j], [i, k], [j, k]];
                for (pos, &v) in e.iter().enumerate() {
                    if owner.get(&v) != Some(&slots[pos]) {
                        return Err(Error::InvalidArgument(format!(
                            "edge {e:?} of constituent {:?} leaves its pair sets",
                            c.indices
                        )));
                    }
                }
                entry.insert(e);
            }
        }
        Ok(Reduced3Graph {
            t,
            pair_sets: sets,
            constituents: cons,
        })
    }

    pub fn index_count(&self) -> usize {
        self.t
    }

    pub fn pair_set(&self, i: u32, j: u32) -> &[u32] {
        self.pair_sets.get(&pair(i, j)).map_or(&[], Vec::as_slice)
    }

    pub fn constituent(&self, triple: [u32; 3]) -> impl Iterator<Item = &[u32; 3]> {
        self.constituents.get(&triple).into_iter().flatten()
    }

    pub fn constituent_size(&self, triple: [u32; 3]) -> usize {
        self.constituents.get(&triple).map_or(0, BTreeSet::len)
    }

    fn has_edge(&self, triple: [u32; 3], e: [u32; 3]) -> bool {
        self.constituents.get(&triple).is_some_and(|s| s.contains(&e))
    }

    /// A copy with one more constituent edge.
    pub fn with_edge(&self, triple: [u32; 3], e: [u32; 3]) -> Result<Self> {
        let mut raw: RawReduced = self.clone().into();
        match raw.constituents.iter_mut().find(|c| c.indices == triple) {
            Some(c) => c.edges.push(e),
            None => raw.constituents.push(Constituent {
                indices: triple,
                edges: vec![e],
            }),
        }
        raw.try_into()
    }

    fn triples(&self) -> impl Iterator<Item = [u32; 3]> + '_ {
        let t = self.t as u32;
        (0..t).flat_map(move |i| (i + 1..t).flat_map(move |j| (j + 1..t).map(move |k| [i, j, k])))
    }
}

/// `e(A^{ijk}) ≥ d·|P^{ij}||P^{ik}||P^{jk}|` for every index triple.
pub fn is_uniformly_dense_reduced(a: &Reduced3Graph, d: f64) -> Result<bool> {
    if let Some((k, _)) = a.pair_sets.iter().find(|(_, v)| v.is_empty()) {
        return Err(Error::EmptySet(format!("pair set {k:?}")));
    }
    Ok(a.triples().all(|[i, j, k]| {
        let vol = (a.pair_set(i, j).len() * a.pair_set(i, k).len() * a.pair_set(j, k).len()) as f64;
        a.constituent_size([i, j, k]) as f64 >= d * vol
    }))
}

/// `λ: V(F) → [t]` and `φ: ∂F → ⋃ P^{ij}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedMap {
    pub lambda: Vec<u32>,
    pub phi: Vec<(Pair, u32)>,
}

impl ReducedMap {
    pub fn verify(&self, f: &ThreeGraph, a: &Reduced3Graph) -> bool {
        if self.lambda.len() != f.vertex_count() || self.lambda.iter().any(|&l| l as usize >= a.t) {
            return false;
        }
        let phi: BTreeMap<Pair, u32> = self.phi.iter().copied().collect();
        let lam = |v: u32| self.lambda[v as usize];
        let shadow_ok = f.shadow().iter().all(|&[u, v]| {
            lam(u) != lam(v) && phi.get(&[u, v]).is_some_and(|x| a.pair_set(lam(u), lam(v)).binary_search(x).is_ok())
        });
        shadow_ok
            && f.edges().iter().all(|&e| {
                let mut e = e;
                e.sort_by_key(|&v| lam(v));
                let [u, v, w] = e;
                a.has_edge([lam(u), lam(v), lam(w)], [phi[&pair(u, v)], phi[&pair(u, w)], phi[&pair(v, w)]])
            })
    }
}

fn phi_search(
    f: &ThreeGraph,
    a: &Reduced3Graph,
    lambda: &[u32],
    shadow: &[Pair],
    meter: &mut Meter,
) -> Result<Option<Option<Vec<u32>>>> {
    let var: BTreeMap<Pair, usize> = shadow.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let sets: Vec<&[u32]> = shadow.iter().map(|&[u, v]| a.pair_set(lambda[u as usize], lambda[v as usize])).collect();
    if let Some(s) = sets.iter().find(|s| s.len() > MAX_VALUES) {
        return Err(Error::TooLarge {
            what: "pair set",
            limit: MAX_VALUES,
            got: s.len(),
        });
    }
    let mut csp = Csp::new(sets.iter().map(|s| full_domain(s.len())).collect());
    for &e in f.edges() {
        let mut e = e;
        e.sort_by_key(|&v| lambda[v as usize]);
        let [u, v, w] = e;
        let vars = [var[&pair(u, v)], var[&pair(u, w)], var[&pair(v, w)]];
        let local = |k: usize, x: u32| sets[vars[k]].binary_search(&x).ok().map(|i| i as u32);
        let table: Vec<[u32; 3]> = a
            .constituent([lambda[u as usize], lambda[v as usize], lambda[w as usize]])
            .filter_map(|&[p, q, r]| Some([local(0, p)?, local(1, q)?, local(2, r)?]))
            .collect();
        let table: Table = Arc::new(table);
        if !csp.add(vars, table) {
            return Ok(Some(None));
        }
    }
    let mut found = None;
    let complete = csp.solve(meter, &mut |vals| {
        found = Some(vals.iter().enumerate().map(|(i, &x)| sets[i][x as usize]).collect());
        Flow::Stop
    });
    Ok(if complete || found.is_some() { Some(found) } else { None })
}

struct LambdaSearch<'a> {
    f: &'a ThreeGraph,
    a: &'a Reduced3Graph,
    order: &'a [u32],
    nbrs: &'a [Vec<u32>],
    /// Edges whose last vertex in `order` is the key.
    edges_at: &'a [Vec<[u32; 3]>],
    shadow: &'a [Pair],
    meter: &'a mut Meter,
    lambda: Vec<u32>,
    result: Option<ReducedMap>,
    exhausted: bool,
}

impl LambdaSearch<'_> {
    fn done(&self) -> bool {
        self.result.is_some() || self.exhausted
    }

    fn assign(&mut self, depth: usize) -> Result<()> {
        if self.done() {
            return Ok(());
        }
        if !self.meter.tick() {
            self.exhausted = true;
            return Ok(());
        }
        if depth == self.order.len() {
            let mut full = self.lambda.clone();
            full.iter_mut().filter(|l| **l == u32::MAX).for_each(|l| *l = 0);
            match phi_search(self.f, self.a, &full, self.shadow, self.meter)? {
                None => self.exhausted = true,
                Some(None) => {}
                Some(Some(values)) => {
                    self.result = Some(ReducedMap {
                        lambda: full,
                        phi: self.shadow.iter().copied().zip(values).collect(),
                    })
                }
            }
            return Ok(());
        }
        let v = self.order[depth] as usize;
        for l in 0..self.a.t as u32 {
            if self.nbrs[v].iter().any(|&u| self.lambda[u as usize] == l) {
                continue;
            }
            self.lambda[v] = l;
            let ok = self.edges_at[v].iter().all(|e| {
                let mut t = e.map(|x| self.lambda[x as usize]);
                t.sort_unstable();
                self.a.constituent_size(t) > 0
            });
            if ok {
                self.assign(depth + 1)?;
            }
            self.lambda[v] = u32::MAX;
            if self.done() {
                break;
            }
        }
        Ok(())
    }
}

/// Searches for a reduced map: `λ` properly colors `∂F` by degree order,
/// then `φ` is solved as a table CSP.
pub fn reduced_map_exists(f: &ThreeGraph, a: &Reduced3Graph, budget: Budget) -> Result<Report<SearchOutcome<ReducedMap>>> {
    let n = f.vertex_count();
    let shadow = f.shadow();
    let mut meter = Meter::new(budget);
    if f.edge_count() == 0 {
        return Ok(Report {
            outcome: SearchOutcome::Found(ReducedMap {
                lambda: vec![0; n],
                phi: Vec::new(),
            }),
            nodes: 0,
        });
    }
    if a.t == 0 {
        return Ok(Report {
            outcome: SearchOutcome::Absent,
            nodes: 0,
        });
    }
    let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &[u, v] in &shadow {
        nbrs[u as usize].push(v);
        nbrs[v as usize].push(u);
    }
    let mut order: Vec<u32> = (0..n as u32).filter(|&v| !nbrs[v as usize].is_empty()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(nbrs[v as usize].len()), v));
    let mut edges_at: Vec<Vec<[u32; 3]>> = vec![Vec::new(); n];
    let pos: BTreeMap<u32, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for &e in f.edges() {
        let last = *e.iter().max_by_key(|&&v| pos[&v]).expect("edge");
        edges_at[last as usize].push(e);
    }
    let mut search = LambdaSearch {
        f,
        a,
        order: &order,
        nbrs: &nbrs,
        edges_at: &edges_at,
        shadow: &shadow,
        meter: &mut meter,
        lambda: vec![u32::MAX; n],
        result: None,
        exhausted: false,
    };
    search.assign(0)?;
    let (result, exhausted) = (search.result, search.exhausted);
    let nodes = meter.nodes;
    let outcome = match (result, exhausted) {
        (Some(m), _) => SearchOutcome::Found(m),
        (None, true) => SearchOutcome::BudgetExceeded,
        (None, false) => SearchOutcome::Absent,
    };
    Ok(Report { outcome, nodes })
}

/// Identification of `s`-element subsets of the pair sets with `[s]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub indices: Vec<u32>,
    /// For each index pair of `indices`, the vertex representing each color.
    pub maps: Vec<([u32; 2], Vec<u32>)>,
}

/// Reads the common palette induced on every triple of `slice.indices`.
pub fn palette_from_slice(a: &Reduced3Graph, slice: &Slice) -> Result<Palette> {
    let maps: BTreeMap<[u32; 2], &Vec<u32>> = slice.maps.iter().map(|(k, v)| (*k, v)).collect();
    let s = maps.values().next().map_or(0, |v| v.len());
    let mut idx = slice.indices.clone();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() < 3 {
        return Err(Error::InvalidArgument("a slice needs at least three indices".into()));
    }
    let color_of = |i: u32, j: u32| -> Result<BTreeMap<u32, u32>> {
        let m = maps
            .get(&[i, j])
            .ok_or_else(|| Error::InvalidArgument(format!("no identification for pair {:?}", [i, j])))?;
        if m.len() != s {
            return Err(Error::DimensionMismatch { expected: s, got: m.len() });
        }
        let set = a.pair_set(i, j);
        if let Some(x) = m.iter().find(|x| set.binary_search(x).is_err()) {
            return Err(Error::InvalidArgument(format!("vertex {x} is not in pair set {:?}", [i, j])));
        }
        Ok(m.iter().enumerate().map(|(c, &x)| (x, c as u32)).collect())
    };
    let mut common: Option<BTreeSet<[u32; 3]>> = None;
    for (x, &i) in idx.iter().enumerate() {
        for (y, &j) in idx.iter().enumerate().skip(x + 1) {
            for &k in &idx[y + 1..] {
                let (cij, cik, cjk) = (color_of(i, j)?, color_of(i, k)?, color_of(j, k)?);
                let here: BTreeSet<[u32; 3]> = a
                    .constituent([i, j, k])
                    .filter_map(|[p, q, r]| Some([*cij.get(p)?, *cik.get(q)?, *cjk.get(r)?]))
                    .collect();
                match &common {
                    None => common = Some(here),
                    Some(c) if *c != here => return Err(Error::SliceDisagreement { triple: [i, j, k] }),
                    _ => {}
                }
            }
        }
    }
    Palette::new(s, common.unwrap_or_default())
}

/// Blow-down of `g` over `t` indices: every pair set is a copy of `C(g)` and
/// every constituent copies the patterns. Returns the identity slice too.
pub fn reduced_from_palette(g: &Palette, t: usize) -> Result<(Reduced3Graph, Slice)> {
    let s = g.color_count() as u32;
    let mut pair_sets = Vec::new();
    let mut base = BTreeMap::new();
    let mut next = 0u32;
    for i in 0..t as u32 {
        for j in i + 1..t as u32 {
            base.insert([i, j], next);
            pair_sets.push(PairSet {
                indices: [i, j],
                vertices: (next..next + s).collect(),
            });
            next += s;
        }
    }
    let mut constituents = Vec::new();
    for i in 0..t as u32 {
        for j in i + 1..t as u32 {
            for k in j + 1..t as u32 {
                let edges = g
                    .patterns()
                    .iter()
                    .map(|&[a, b, c]| [base[&[i, j]] + a, base[&[i, k]] + b, base[&[j, k]] + c])
                    .collect();
                constituents.push(Constituent {
                    indices: [i, j, k],
                    edges,
                });
            }
        }
    }
    let slice = Slice {
        indices: (0..t as u32).collect(),
        maps: pair_sets.iter().map(|ps| (ps.indices, ps.vertices.clone())).collect(),
    };
    Ok((Reduced3Graph::new(t, pair_sets, constituents)?, slice))
}

/// Lifts a painting of `F` by `g` into the blow-down of `g` over `t ≥ v(F)`
/// indices: `λ` is the position, `φ(uv)` the copy of `χ(uv)`.
pub fn lift_painting(painting: &Painting, g: &Palette, t: usize) -> Result<ReducedMap> {
    let n = painting.ordering.len();
    if t < n {
        return Err(Error::InvalidArgument(format!("lifting needs t >= v(F) = {n}, got {t}")));
    }
    let (_, slice) = reduced_from_palette(g, t)?;
    let mut lambda = vec![0u32; n];
    for (i, &v) in painting.ordering.iter().enumerate() {
        lambda[v as usize] = i as u32;
    }
    let maps: BTreeMap<[u32; 2], Vec<u32>> = slice.maps.into_iter().collect();
    let phi = painting
        .coloring
        .iter()
        .map(|&([u, v], c)| {
            let key = pair(lambda[u as usize], lambda[v as usize]);
            let x = maps[&key].get(c as usize).copied().ok_or(Error::ColorOutOfRange {
                color: c,
                color_count: g.color_count(),
            })?;
            Ok(([u, v], x))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReducedMap { lambda, phi })
}

/// Random reduced 3-graph with `size` vertices per pair set and constituent
/// edge probability `p`.
pub fn random_reduced(t: usize, size: usize, p: f64, seed: u64) -> Result<Reduced3Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pair_sets = Vec::new();
    let mut next = 0u32;
    let mut base = BTreeMap::new();
    for i in 0..t as u32 {
        for j in i + 1..t as u32 {
            base.insert([i, j], next);
            pair_sets.push(PairSet {
                indices: [i, j],
                vertices: (next..next + size as u32).collect(),
            });
            next += size as u32;
        }
    }
    let mut constituents = Vec::new();
    let s = size as u32;
    for i in 0..t as u32 {
        for j in i + 1..t as u32 {
            for k in j + 1..t as u32 {
                let mut edges = Vec::new();
                for a in 0..s {
                    for b in 0..s {
                        for c in 0..s {
                            if rng.random_bool(p) {
                                edges.push([base[&[i, j]] + a, base[&[i, k]] + b, base[&[j, k]] + c]);
                            }
                        }
                    }
                }
                constituents.push(Constituent {
                    indices: [i, j, k],
                    edges,
                });
            }
        }
    }
    Reduced3Graph::new(t, pair_sets, constituents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::painting::find_painting;

    #[test]
    fn trivial_constructions() {
        let one = Palette::new(1, [[0, 0, 0]]).unwrap();
        let w = WeightVector::uniform(1).unwrap();
        let c = palette_construction(&one, &w, 7, 3).unwrap();
        assert_eq!(c.graph, ThreeGraph::complete(7));
        assert!(c.painting().verify(&one, &c.graph));
        let c = palette_construction(&Palette::empty(2), &WeightVector::uniform(2).unwrap(), 7, 3).unwrap();
        assert_eq!(c.graph.edge_count(), 0);
    }

    #[test]
    fn painted_by_witness() {
        let p = Palette::new(3, [[0, 1, 2], [1, 1, 0], [2, 0, 0]]).unwrap();
        let w = WeightVector::uniform(3).unwrap();
        let c = palette_construction(&p, &w, 20, 11).unwrap();
        assert!(c.painting().verify(&p, &c.graph));
        assert_eq!(c, palette_construction(&p, &w, 20, 11).unwrap());
    }

    #[test]
    fn audit_trivial_cases() {
        let a = d_eta_density_audit(&ThreeGraph::complete(8), 1.0, 0.0, AuditStrategy::Auto, 0, 0).unwrap();
        assert!(a.dense && a.mode == AuditMode::Exhaustive);
        let a = d_eta_density_audit(&ThreeGraph::empty(8), 0.0, 0.0, AuditStrategy::Auto, 0, 0).unwrap();
        assert!(a.dense);
        let a = d_eta_density_audit(&ThreeGraph::empty(8), 0.5, 0.0, AuditStrategy::Auto, 0, 0).unwrap();
        assert!(!a.dense && a.worst.len() == 8);
        let a = d_eta_density_audit(&ThreeGraph::complete(25), 1.0, 0.0, AuditStrategy::Auto, 100, 0).unwrap();
        assert!(a.dense && a.mode == AuditMode::Sampled);
    }

    #[test]
    fn uniform_density() {
        let (a, _) = reduced_from_palette(&Palette::full(2), 4).unwrap();
        assert!(is_uniformly_dense_reduced(&a, 1.0).unwrap());
        let (b, _) = reduced_from_palette(&Palette::empty(2), 4).unwrap();
        assert!(!is_uniformly_dense_reduced(&b, 0.5).unwrap());
        assert!(is_uniformly_dense_reduced(&b, 0.0).unwrap());
    }

    #[test]
    fn slice_round_trip_and_disagreement() {
        let g = Palette::new(2, [[0, 1, 1], [1, 0, 0]]).unwrap();
        let (a, slice) = reduced_from_palette(&g, 4).unwrap();
        assert_eq!(palette_from_slice(&a, &slice).unwrap(), g);
        let extra = a.with_edge([0, 1, 2], [0, 2, 6]).unwrap();
        assert!(matches!(palette_from_slice(&extra, &slice), Err(Error::SliceDisagreement { .. })));
    }

    #[test]
    fn reduced_map_and_lift() {
        let g = Palette::new(3, [[0, 1, 2]]).unwrap();
        let f = ThreeGraph::new(4, [[0, 1, 2], [0, 2, 3]]).unwrap();
        let painting = find_painting(&g, &f, Budget::DEFAULT).unwrap().outcome.found().unwrap();
        let (a, _) = reduced_from_palette(&g, 4).unwrap();
        let lifted = lift_painting(&painting, &g, 4).unwrap();
        assert!(lifted.verify(&f, &a));
        let found = reduced_map_exists(&f, &a, Budget::DEFAULT).unwrap().outcome.found().unwrap();
        assert!(found.verify(&f, &a));
        let (empty, _) = reduced_from_palette(&Palette::empty(3), 4).unwrap();
        assert_eq!(
            reduced_map_exists(&f, &empty, Budget::DEFAULT).unwrap().outcome,
            SearchOutcome::Absent
        );
        assert!(reduced_map_exists(&ThreeGraph::empty(3), &empty, Budget::DEFAULT)
            .unwrap()
            .outcome
            .found()
            .is_some());
    }

    #[test]
    fn json_shape() {
        let (a, _) = reduced_from_palette(&Palette::full(1), 3).unwrap();
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["t"], 3);
        assert_eq!(v["pair_sets"].as_array().unwrap().len(), 3);
        let back: Reduced3Graph = serde_json::from_value(v).unwrap();
        assert_eq!(back, a);
    }
}
