//! Ordering gadgets: σ-compatibility, the three-edge gadget `G_σ`, the
//! triangle system of a palette and the colored-graph to 3-graph step.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pair, Pair, ThreeGraph};
use crate::painting::Painting;
use crate::palette::{for_each_permutation, Palette};
use crate::search::{Budget, Report, SearchOutcome};

/// A permutation of `0..k`; written 1-based as `3,1,4,2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            match seen.get_mut(x) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::InvalidPermutation(format!("{images:?} is not a permutation of 0..{}", images.len()))),
            }
        }
        Ok(Permutation(images))
    }

    pub fn identity(k: usize) -> Self {
        Permutation((0..k).collect())
    }

    pub fn reversal(k: usize) -> Self {
        Permutation((0..k).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        *self == Permutation::identity(self.len())
    }

    pub fn is_reversal(&self) -> bool {
        *self == Permutation::reversal(self.len())
    }

    /// All permutations of `0..k` in lexicographic order.
    pub fn all(k: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut items: Vec<usize> = (0..k).collect();
        for_each_permutation(&mut items, &mut |p| out.push(Permutation(p.to_vec())));
        out.sort();
        out
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl FromStr for Permutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let images = s
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(x) if x >= 1 => Ok(x - 1),
                _ => Err(Error::InvalidPermutation(format!("bad entry {t:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(images)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| (x + 1).to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Checks `x_i ⋖ x_j ⇔ σ(i) < σ(j)` for all `i < j`, where `rank[v]` is the
/// position of `v` in `⋖` and the edge is read in increasing label order.
pub fn sigma_compatible(edge: &[u32], sigma: &Permutation, rank: &[usize]) -> Result<bool> {
    if edge.len() != sigma.len() {
        return Err(Error::DimensionMismatch {
            expected: sigma.len(),
            got: edge.len(),
        });
    }
    let mut x = edge.to_vec();
    x.sort_unstable();
    if x.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("edge vertices must be distinct".into()));
    }
    if let Some(&v) = x.iter().find(|&&v| v as usize >= rank.len()) {
        return Err(Error::VertexOutOfRange {
            vertex: v,
            vertex_count: rank.len(),
        });
    }
    let k = x.len();
    Ok((0..k).all(|i| {
        (i + 1..k).all(|j| (rank[x[i] as usize] < rank[x[j] as usize]) == (sigma.apply(i) < sigma.apply(j)))
    }))
}

/// The unique permutation an edge is compatible with under `rank`.
pub fn compatible_permutation(edge: &[u32], rank: &[usize]) -> Result<Permutation> {
    let mut x = edge.to_vec();
    x.sort_unstable();
    let ranks: Vec<usize> = x
        .iter()
        .map(|&v| {
            rank.get(v as usize).copied().ok_or(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: rank.len(),
            })
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by_key(|&i| ranks[i]);
    let mut images = vec![0; x.len()];
    for (pos, &i) in order.iter().enumerate() {
        images[i] = pos;
    }
    Permutation::new(images)
}

/// Indices `(a, b, c, d)` with `a < b`, `c < d`, `σ(a) < σ(b)` and
/// `σ(c) > σ(d)`, all 0-based.
pub type GadgetTuple = [usize; 4];

fn check_sigma(sigma: &Permutation) -> Result<()> {
    if sigma.len() < 3 {
        return Err(Error::InvalidArgument("G_sigma needs k >= 3".into()));
    }
    if sigma.is_identity() || sigma.is_reversal() {
        return Err(Error::InvalidPermutation(format!("{sigma} is the identity or the reversal")));
    }
    Ok(())
}

/// Lexicographically least admissible tuple.
pub fn canonical_tuple(sigma: &Permutation) -> Result<GadgetTuple> {
    check_sigma(sigma)?;
    let k = sigma.len();
    let up = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .find(|&(a, b)| sigma.apply(a) < sigma.apply(b));
    let down = (0..k)
        .flat_map(|c| (c + 1..k).map(move |d| (c, d)))
        .find(|&(c, d)| sigma.apply(c) > sigma.apply(d));
    match (up, down) {
        (Some((a, b)), Some((c, d))) => Ok([a, b, c, d]),
        _ => Err(Error::InvalidPermutation(sigma.to_string())),
    }
}

/// A `k`-uniform hypergraph with three edges, each listed in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GSigma {
    pub sigma: Permutation,
    pub tuple: GadgetTuple,
    pub vertex_count: usize,
    /// `[x, y, z]`.
    pub edges: [Vec<u32>; 3],
}

impl GSigma {
    /// Re-checks `x_a = z_c`, `x_b = y_a`, `y_b = z_d`, linearity and sizes.
    pub fn satisfies_identities(&self) -> bool {
        let [a, b, c, d] = self.tuple;
        let [x, y, z] = &self.edges;
        let k = self.sigma.len();
        let sorted = self.edges.iter().all(|e| e.len() == k && e.windows(2).all(|w| w[0] < w[1]));
        let meet = |p: &[u32], q: &[u32]| p.iter().filter(|v| q.contains(v)).count();
        sorted
            && x[a] == z[c]
            && x[b] == y[a]
            && y[b] == z[d]
            && meet(x, y) == 1
            && meet(x, z) == 1
            && meet(y, z) == 1
            && self.edges.iter().flatten().all(|&v| (v as usize) < self.vertex_count)
    }

    pub fn is_linear(&self) -> bool {
        let [x, y, z] = &self.edges;
        let meet = |p: &[u32], q: &[u32]| p.iter().filter(|v| q.contains(v)).count();
        meet(x, y) == 1 && meet(x, z) == 1 && meet(y, z) == 1
    }
}

/// `G_σ` with the canonical tuple.
pub fn build_g_sigma(sigma: &Permutation) -> Result<GSigma> {
    let tuple = canonical_tuple(sigma)?;
    build_g_sigma_with(sigma, tuple)
}

/// Lays out `G_σ` for a given admissible tuple.
///
/// With shared vertices `u = x_a = z_c`, `v = x_b = y_a`, `w = y_b = z_d`
/// the labels read `G0 u G1 v G2 w G3`. Each private vertex sits in the
/// latest gap its edge order allows; within a gap, `x` before `y` before
/// `z`, then by index.
pub fn build_g_sigma_with(sigma: &Permutation, tuple: GadgetTuple) -> Result<GSigma> {
    check_sigma(sigma)?;
    let k = sigma.len();
    let [a, b, c, d] = tuple;
    let ok = a < b && c < d && d < k && b < k && sigma.apply(a) < sigma.apply(b) && sigma.apply(c) > sigma.apply(d);
    if !ok {
        return Err(Error::InvalidArgument(format!("tuple {tuple:?} is not admissible for {sigma}")));
    }
    // (edge, index) of the three shared slots, per edge: index -> shared id
    let shared: [[Option<(usize, usize)>; 2]; 3] = [
        [Some((a, 0)), Some((b, 1))],
        [Some((a, 1)), Some((b, 2))],
        [Some((c, 0)), Some((d, 2))],
    ];
    // gap for a private index of each edge: the last gap below its next shared slot
    let gap = |edge: usize, i: usize| -> usize {
        let s = shared[edge];
        let (lo, hi) = (s[0].unwrap(), s[1].unwrap());
        if i < lo.0 {
            lo.1
        } else if i < hi.0 {
            hi.1
        } else {
            3
        }
    };
    let mut slots: BTreeMap<(usize, usize, usize), (usize, usize)> = BTreeMap::new();
    for (edge, links) in shared.iter().enumerate() {
        for i in 0..k {
            let is_shared = links.iter().flatten().any(|&(j, _)| j == i);
            if !is_shared {
                slots.insert((gap(edge, i), edge, i), (edge, i));
            }
        }
    }
    let mut labels = [vec![u32::MAX; k], vec![u32::MAX; k], vec![u32::MAX; k]];
    let mut next = 0u32;
    for g in 0..4 {
        for (&(gg, _, _), &(edge, i)) in slots.range((g, 0, 0)..(g + 1, 0, 0)) {
            debug_assert_eq!(gg, g);
            labels[edge][i] = next;
            next += 1;
        }
        if g < 3 {
            for (edge, s) in shared.iter().enumerate() {
                for &(i, id) in s.iter().flatten() {
                    if id == g {
                        labels[edge][i] = next;
                    }
                }
            }
            next += 1;
        }
    }
    let out = GSigma {
        sigma: sigma.clone(),
        tuple,
        vertex_count: next as usize,
        edges: labels,
    };
    if out.vertex_count != 3 * k - 3 || !out.satisfies_identities() {
        return Err(Error::InvalidArgument(format!("layout failed for {sigma} with {tuple:?}")));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCertificate {
    /// Orders examined.
    pub orders: u64,
    /// Orders under which all three edges were compatible.
    pub counterexamples: u64,
}

/// Checks every total order of `V(G_σ)` and counts those making all three
/// edges σ-compatible. The claim holds when that count is zero.
pub fn verify_gsigma_claim(g: &GSigma, budget: Budget) -> Result<Report<SearchOutcome<ClaimCertificate>>> {
    let n = g.vertex_count;
    let total: u128 = (1..=n as u128).product();
    if total > budget.0 as u128 {
        return Ok(Report {
            outcome: SearchOutcome::BudgetExceeded,
            nodes: 0,
        });
    }
    let bad = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    (0..n).into_par_iter().for_each(|first| {
        let mut rest: Vec<u32> = (0..n as u32).filter(|&v| v as usize != first).collect();
        let mut rank = vec![0usize; n];
        let mut local = 0u64;
        for_each_permutation(&mut rest, &mut |perm| {
            if stop.load(Ordering::Relaxed) {
                return;
            }
            rank[first] = 0;
            for (i, &v) in perm.iter().enumerate() {
                rank[v as usize] = i + 1;
            }
            let all = g
                .edges
                .iter()
                .all(|e| sigma_compatible(e, &g.sigma, &rank).unwrap_or(false));
            if all {
                local += 1;
            }
        });
        bad.fetch_add(local, Ordering::Relaxed);
    });
    let orders = total as u64;
    Ok(Report {
        outcome: SearchOutcome::Found(ClaimCertificate {
            orders,
            counterexamples: bad.into_inner(),
        }),
        nodes: orders,
    })
}

/// A graph on `0..n` with its natural order and optional edge labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedGraph {
    pub vertex_count: usize,
    pub edges: Vec<Pair>,
    /// Parallel to `edges` when present.
    pub labels: Option<Vec<u32>>,
}

impl OrderedGraph {
    pub fn new(vertex_count: usize, edges: Vec<Pair>, labels: Option<Vec<u32>>) -> Result<Self> {
        let mut zipped: Vec<(Pair, Option<u32>)> = Vec::with_capacity(edges.len());
        if let Some(l) = &labels {
            if l.len() != edges.len() {
                return Err(Error::DimensionMismatch {
                    expected: edges.len(),
                    got: l.len(),
                });
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e[0] == e[1] {
                return Err(Error::InvalidArgument(format!("loop at {}", e[0])));
            }
            for &v in e {
                if v as usize >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: v, vertex_count });
                }
            }
            zipped.push((pair(e[0], e[1]), labels.as_ref().map(|l| l[i])));
        }
        zipped.sort_unstable();
        if zipped.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("repeated edge".into()));
        }
        let has = labels.is_some();
        let (edges, labels): (Vec<Pair>, Vec<Option<u32>>) = zipped.into_iter().unzip();
        Ok(OrderedGraph {
            vertex_count,
            edges,
            labels: has.then(|| labels.into_iter().flatten().collect()),
        })
    }

    pub fn label(&self, a: u32, b: u32) -> Option<u32> {
        let i = self.edges.binary_search(&pair(a, b)).ok()?;
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.binary_search(&pair(a, b)).is_ok()
    }

    /// Edges carrying label `color`.
    pub fn class(&self, color: u32) -> Vec<Pair> {
        match &self.labels {
            None => Vec::new(),
            Some(l) => self
                .edges
                .iter()
                .zip(l)
                .filter(|&(_, &c)| c == color)
                .map(|(&e, _)| e)
                .collect(),
        }
    }

    /// Triangles `x < y < z`.
    pub fn triangles(&self) -> Vec<[u32; 3]> {
        let mut up: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); self.vertex_count];
        for &[a, b] in &self.edges {
            up[a as usize].insert(b);
        }
        let mut out = Vec::new();
        for x in 0..self.vertex_count {
            for &y in &up[x] {
                for &z in up[x].range(y + 1..) {
                    if up[y as usize].contains(&z) {
                        out.push([x as u32, y, z]);
                    }
                }
            }
        }
        out
    }
}

/// Disjoint labeled triangles, one per pattern of `Q` in sorted order: the
/// `j`-th uses vertices `3j, 3j+1, 3j+2` with labels `(a, b, c)` on the
/// pairs `{3j,3j+1}`, `{3j,3j+2}`, `{3j+1,3j+2}`.
pub fn build_triangle_system(q: &Palette) -> Result<OrderedGraph> {
    if q.is_empty() {
        return Err(Error::EmptySet("triangle system needs a pattern".into()));
    }
    let mut edges = Vec::new();
    let mut labels = Vec::new();
    for (j, &[a, b, c]) in q.patterns().iter().enumerate() {
        let v = 3 * j as u32;
        edges.extend([[v, v + 1], [v, v + 2], [v + 1, v + 2]]);
        labels.extend([a, b, c]);
    }
    OrderedGraph::new(3 * q.pattern_count(), edges, Some(labels))
}

/// Triangles `x < y < z` whose labels `(φ(xy), φ(xz), φ(yz))` form a pattern.
pub fn hypergraph_from_colored_graph(g: &OrderedGraph, q: &Palette) -> Result<ThreeGraph> {
    let labels = g
        .labels
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("graph has unlabeled edges".into()))?;
    if let Some(&c) = labels.iter().find(|&&c| c as usize >= q.color_count()) {
        return Err(Error::ColorOutOfRange {
            color: c,
            color_count: q.color_count(),
        });
    }
    let edges = g.triangles().into_iter().filter(|&[x, y, z]| {
        let l = |a, b| g.label(a, b).expect("labeled");
        q.contains(&[l(x, y), l(x, z), l(y, z)])
    });
    ThreeGraph::new(g.vertex_count, edges)
}

/// The natural order with the edge labels, restricted to the shadow of `f`.
pub fn natural_painting(g: &OrderedGraph, f: &ThreeGraph) -> Result<Painting> {
    let coloring = f
        .shadow()
        .into_iter()
        .map(|p| {
            g.label(p[0], p[1])
                .map(|c| (p, c))
                .ok_or_else(|| Error::InvalidArgument(format!("pair {p:?} is not a labeled edge")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Painting::new((0..g.vertex_count as u32).collect(), coloring))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_based(e: &[u32]) -> Vec<u32> {
        e.iter().map(|v| v + 1).collect()
    }

    #[test]
    fn figure_layout() {
        let sigma: Permutation = "3,1,4,2".parse().unwrap();
        let g = build_g_sigma_with(&sigma, [1, 2, 0, 1]).unwrap();
        assert_eq!(one_based(&g.edges[0]), vec![1, 2, 4, 6]);
        assert_eq!(one_based(&g.edges[1]), vec![3, 4, 5, 7]);
        assert_eq!(one_based(&g.edges[2]), vec![2, 5, 8, 9]);
        let c = build_g_sigma(&sigma).unwrap();
        assert_eq!(c.tuple, [0, 2, 0, 1]);
        assert!(c.satisfies_identities() && c.vertex_count == 9);
    }

    #[test]
    fn rejects_trivial_sigma() {
        assert!(build_g_sigma(&Permutation::identity(4)).is_err());
        assert!(build_g_sigma(&Permutation::reversal(3)).is_err());
        assert!("1,1,2".parse::<Permutation>().is_err());
    }

    #[test]
    fn uniqueness_and_identity() {
        let rank: Vec<usize> = vec![2, 0, 3, 1];
        let e = [0, 1, 2, 3];
        let hits: Vec<_> = Permutation::all(4)
            .into_iter()
            .filter(|s| sigma_compatible(&e, s, &rank).unwrap())
            .collect();
        assert_eq!(hits, vec![compatible_permutation(&e, &rank).unwrap()]);
        let natural: Vec<usize> = (0..4).collect();
        assert!(sigma_compatible(&e, &Permutation::identity(4), &natural).unwrap());
        assert!(!sigma_compatible(&e, &Permutation::reversal(4), &natural).unwrap());
    }

    #[test]
    fn claim_k3() {
        for s in Permutation::all(3) {
            if s.is_identity() || s.is_reversal() {
                continue;
            }
            let g = build_g_sigma(&s).unwrap();
            let r = verify_gsigma_claim(&g, Budget::DEFAULT).unwrap();
            let cert = r.outcome.found().unwrap();
            assert_eq!((cert.orders, cert.counterexamples), (720, 0));
        }
    }

    #[test]
    fn triangle_figure() {
        let q = Palette::new(3, [[0, 1, 0], [0, 2, 2], [1, 1, 0], [2, 0, 1]]).unwrap();
        let g = build_triangle_system(&q).unwrap();
        let blue: Vec<Vec<u32>> = g.class(0).iter().map(|e| one_based(e)).collect();
        assert_eq!(blue, vec![vec![1, 2], vec![2, 3], vec![4, 5], vec![8, 9], vec![10, 12]]);
        let h = hypergraph_from_colored_graph(&g, &q).unwrap();
        assert_eq!(h.edges(), &[[0, 1, 2], [3, 4, 5], [6, 7, 8], [9, 10, 11]]);
        assert!(natural_painting(&g, &h).unwrap().verify(&q, &h));
        assert_eq!(hypergraph_from_colored_graph(&g, &Palette::empty(3)).unwrap().edge_count(), 0);
    }
}
