use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An unordered vertex pair stored as `[min, max]`.
pub type Pair = [u32; 2];
/// An unordered vertex triple stored sorted.
pub type Edge = [u32; 3];

pub fn pair(a: u32, b: u32) -> Pair {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub fn sorted_edge(mut e: [u32; 3]) -> Edge {
    e.sort_unstable();
    e
}

/// A 3-uniform hypergraph on vertices `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct ThreeGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl TryFrom<RawGraph> for ThreeGraph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        ThreeGraph::new(raw.vertex_count, raw.edges)
    }
}

impl From<ThreeGraph> for RawGraph {
    fn from(g: ThreeGraph) -> Self {
        RawGraph {
            vertex_count: g.vertex_count,
            edges: g.edges,
        }
    }
}

impl ThreeGraph {
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = [u32; 3]>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for e in edges {
            let e = sorted_edge(e);
            if e[0] == e[1] || e[1] == e[2] {
                return Err(Error::BadEdge(e));
            }
            if e[2] as usize >= vertex_count {
                return Err(Error::VertexOutOfRange {
                    vertex: e[2],
                    vertex_count,
                });
            }
            set.insert(e);
        }
        Ok(ThreeGraph {
            vertex_count,
            edges: set.into_iter().collect(),
        })
    }

    pub fn empty(vertex_count: usize) -> Self {
        ThreeGraph {
            vertex_count,
            edges: Vec::new(),
        }
    }

    /// Complete 3-graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let n = n as u32;
        let edges = (0..n)
            .flat_map(|a| (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| [a, b, c])))
            .collect();
        ThreeGraph {
            vertex_count: n as usize,
            edges,
        }
    }

    /// `K4^-`: three edges on four vertices.
    pub fn k4_minus() -> Self {
        ThreeGraph::new(4, [[0, 1, 2], [0, 1, 3], [0, 2, 3]]).expect("valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, e: &[u32; 3]) -> bool {
        self.edges.binary_search(&sorted_edge(*e)).is_ok()
    }

    /// Pairs covered by at least one edge, sorted.
    pub fn shadow(&self) -> Vec<Pair> {
        let set: BTreeSet<Pair> = self
            .edges
            .iter()
            .flat_map(|&[a, b, c]| [[a, b], [a, c], [b, c]])
            .collect();
        set.into_iter().collect()
    }

    /// Vertices lying in some edge.
    pub fn covered_vertices(&self) -> BTreeSet<u32> {
        self.edges.iter().flatten().copied().collect()
    }

    /// Sub-3-graph keeping the edges selected by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(&Edge) -> bool) -> ThreeGraph {
        ThreeGraph {
            vertex_count: self.vertex_count,
            edges: self.edges.iter().copied().filter(|e| keep(e)).collect(),
        }
    }

    /// Relabels vertices by `map[old] = new`.
    pub fn relabel(&self, map: &[u32], vertex_count: usize) -> Result<ThreeGraph> {
        if map.len() != self.vertex_count {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count,
                got: map.len(),
            });
        }
        ThreeGraph::new(
            vertex_count,
            self.edges.iter().map(|e| e.map(|v| map[v as usize])),
        )
    }

    /// Induced sub-3-graph on `vertices`, relabeled in increasing order.
    pub fn induced(&self, vertices: &BTreeSet<u32>) -> ThreeGraph {
        let mut idx = vec![u32::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            if let Some(slot) = idx.get_mut(v as usize) {
                *slot = i as u32;
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| e.iter().all(|&v| idx[v as usize] != u32::MAX))
            .map(|e| e.map(|v| idx[v as usize]))
            .collect();
        ThreeGraph {
            vertex_count: vertices.len(),
            edges,
        }
    }

    /// Connected components of the edge set, as lists of edge indices.
    pub fn edge_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            for &v in &e[1..] {
                let (a, b) = (find(&mut parent, e[0] as usize), find(&mut parent, v as usize));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, e) in self.edges.iter().enumerate() {
            let r = find(&mut parent, e[0] as usize);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// Any two edges share at most one vertex.
    pub fn is_linear(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges
            .iter()
            .flat_map(|&[a, b, c]| [[a, b], [a, c], [b, c]])
            .all(|p| seen.insert(p))
    }

    /// Disjoint union, `other` shifted past `self`.
    pub fn disjoint_union(&self, other: &ThreeGraph) -> ThreeGraph {
        let off = self.vertex_count as u32;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|e| e.map(|v| v + off)))
            .collect();
        ThreeGraph {
            vertex_count: self.vertex_count + other.vertex_count,
            edges,
        }
    }
}

impl fmt::Display for ThreeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::write_graph(self))
    }
}
