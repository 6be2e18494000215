use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::csp::{full_domain, Csp, Flow, Table, MAX_VALUES};
use crate::error::{Error, Result};
use crate::graph::{pair, Pair, ThreeGraph};
use crate::palette::Palette;
use crate::search::{Budget, Meter, Report, SearchOutcome, Verdict};

/// A vertex ordering together with a coloring of the shadow pairs.
///
/// `ordering[i]` is the vertex at position `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Painting {
    pub ordering: Vec<u32>,
    /// Sorted by pair.
    pub coloring: Vec<(Pair, u32)>,
}

impl Painting {
    pub fn new(ordering: Vec<u32>, coloring: impl IntoIterator<Item = (Pair, u32)>) -> Self {
        let map: BTreeMap<Pair, u32> = coloring.into_iter().map(|(p, c)| (pair(p[0], p[1]), c)).collect();
        Painting {
            ordering,
            coloring: map.into_iter().collect(),
        }
    }

    pub fn color(&self, a: u32, b: u32) -> Option<u32> {
        let key = pair(a, b);
        self.coloring
            .binary_search_by_key(&key, |&(p, _)| p)
            .ok()
            .map(|i| self.coloring[i].1)
    }

    /// Checks the ordering is a permutation of `V(F)`, the coloring covers
    /// `∂F`, and every edge reads a pattern of `P`.
    pub fn verify(&self, p: &Palette, f: &ThreeGraph) -> bool {
        let n = f.vertex_count();
        let mut pos = vec![usize::MAX; n];
        if self.ordering.len() != n {
            return false;
        }
        for (i, &v) in self.ordering.iter().enumerate() {
            match pos.get_mut(v as usize) {
                Some(slot) if *slot == usize::MAX => *slot = i,
                _ => return false,
            }
        }
        f.edges().iter().all(|e| {
            let mut e = *e;
            e.sort_by_key(|&v| pos[v as usize]);
            let [x, y, z] = e;
            match (self.color(x, y), self.color(x, z), self.color(y, z)) {
                (Some(a), Some(b), Some(c)) => p.contains(&[a, b, c]),
                _ => false,
            }
        })
    }

    /// The same coloring with the ordering reversed; paints `reverse(P)`.
    pub fn reversed(&self) -> Painting {
        Painting {
            ordering: self.ordering.iter().rev().copied().collect(),
            coloring: self.coloring.clone(),
        }
    }

    /// Restriction to a sub-3-graph on the same vertex set.
    pub fn restrict(&self, sub: &ThreeGraph) -> Painting {
        let shadow: HashSet<Pair> = sub.shadow().into_iter().collect();
        Painting {
            ordering: self.ordering.clone(),
            coloring: self
                .coloring
                .iter()
                .filter(|(p, _)| shadow.contains(p))
                .copied()
                .collect(),
        }
    }
}

/// One connected component of `F` prepared for search.
struct Component {
    vertices: Vec<u32>,
    pairs: Vec<Pair>,
    /// `incident[i]` lists edges through `vertices[i]` as local pair indices
    /// plus local vertex indices.
    incident: Vec<Vec<([usize; 3], [usize; 3])>>,
}

impl Component {
    fn build(f: &ThreeGraph, edge_ids: &[usize]) -> Component {
        let edges: Vec<[u32; 3]> = edge_ids.iter().map(|&i| f.edges()[i]).collect();
        let sub = ThreeGraph::new(f.vertex_count(), edges.iter().copied()).expect("sub-3-graph");
        let vertices: Vec<u32> = sub.covered_vertices().into_iter().collect();
        let pairs = sub.shadow();
        let vidx: BTreeMap<u32, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let pidx: BTreeMap<Pair, usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut incident = vec![Vec::new(); vertices.len()];
        for &[a, b, c] in &edges {
            let lv = [vidx[&a], vidx[&b], vidx[&c]];
            let lp = [pidx[&[a, b]], pidx[&[a, c]], pidx[&[b, c]]];
            for &v in &lv {
                incident[v].push((lv, lp));
            }
        }
        Component {
            vertices,
            pairs,
            incident,
        }
    }
}

/// Pair index of local vertices `u`, `v` within an edge given as local
/// vertices `lv` (sorted by id) and pairs `lp`.
fn edge_pair(lv: [usize; 3], lp: [usize; 3], u: usize, v: usize) -> usize {
    let i = lv.iter().position(|&x| x == u).expect("vertex in edge");
    let j = lv.iter().position(|&x| x == v).expect("vertex in edge");
    match (i.min(j), i.max(j)) {
        (0, 1) => lp[0],
        (0, 2) => lp[1],
        _ => lp[2],
    }
}

enum Leaf<'a> {
    First(&'a mut Option<(Vec<usize>, Vec<u32>)>),
    All(&'a mut HashSet<Vec<u32>>),
}

struct OrderSearch<'a> {
    comp: &'a Component,
    table: Table,
    csp: Csp,
    pos: Vec<usize>,
    order: Vec<usize>,
}

impl OrderSearch<'_> {
    /// Returns `None` when the meter ran out, `Some(true)` to stop early.
    fn run(&mut self, meter: &mut Meter, leaf: &mut Leaf) -> Option<bool> {
        let k = self.comp.vertices.len();
        if self.order.len() == k {
            let saved = self.csp.domains().to_vec();
            let order = &self.order;
            let mut stop = false;
            let finished = self.csp.solve(meter, &mut |sol| match leaf {
                Leaf::First(slot) => {
                    **slot = Some((order.clone(), sol.to_vec()));
                    stop = true;
                    Flow::Stop
                }
                Leaf::All(set) => {
                    set.insert(sol.to_vec());
                    Flow::Continue
                }
            });
            self.csp.set_domains(saved);
            return finished.then_some(stop);
        }
        for v in 0..k {
            if self.pos[v] != usize::MAX {
                continue;
            }
            if !meter.tick() {
                return None;
            }
            let here = self.order.len();
            self.pos[v] = here;
            self.order.push(v);
            let saved = self.csp.domains().to_vec();
            let mark = self.csp.constraint_count();
            let mut ok = true;
            for &(lv, lp) in &self.comp.incident[v] {
                if lv.iter().any(|&u| self.pos[u] == usize::MAX) {
                    continue;
                }
                let mut by_pos = lv;
                by_pos.sort_by_key(|&u| self.pos[u]);
                let [x, y, z] = by_pos;
                let vars = [edge_pair(lv, lp, x, y), edge_pair(lv, lp, x, z), edge_pair(lv, lp, y, z)];
                if !self.csp.add(vars, self.table.clone()) {
                    ok = false;
                    break;
                }
            }
            let res = if ok { self.run(meter, leaf) } else { Some(false) };
            self.csp.truncate(mark);
            self.csp.set_domains(saved);
            self.order.pop();
            self.pos[v] = usize::MAX;
            match res {
                Some(false) => {}
                other => return other,
            }
        }
        Some(false)
    }
}

fn prepare(p: &Palette) -> Result<(Palette, Vec<u32>)> {
    let used: Vec<u32> = p.used_colors().into_iter().collect();
    if used.len() > MAX_VALUES {
        return Err(Error::TooLarge {
            what: "painting search",
            limit: MAX_VALUES,
            got: used.len(),
        });
    }
    let compact = p.induced(&used.iter().copied().collect())?;
    Ok((compact, used))
}

fn component_search(comp: &Component, p: &Palette, meter: &mut Meter, leaf: &mut Leaf) -> Option<bool> {
    let table: Table = Arc::new(p.patterns().to_vec());
    let csp = Csp::new(vec![full_domain(p.color_count()); comp.pairs.len()]);
    let mut s = OrderSearch {
        comp,
        table,
        csp,
        pos: vec![usize::MAX; comp.vertices.len()],
        order: Vec::new(),
    };
    s.run(meter, leaf)
}

/// Searches for a painting of `f` by `p`.
pub fn find_painting(p: &Palette, f: &ThreeGraph, budget: Budget) -> Result<Report<SearchOutcome<Painting>>> {
    let (compact, used) = prepare(p)?;
    let mut meter = Meter::new(budget);
    let mut ordering = Vec::new();
    let mut coloring = Vec::new();
    for ids in f.edge_components() {
        let comp = Component::build(f, &ids);
        let mut slot = None;
        match component_search(&comp, &compact, &mut meter, &mut Leaf::First(&mut slot)) {
            None => {
                return Ok(Report {
                    outcome: SearchOutcome::BudgetExceeded,
                    nodes: meter.nodes,
                })
            }
            Some(_) => match slot {
                None => {
                    return Ok(Report {
                        outcome: SearchOutcome::Absent,
                        nodes: meter.nodes,
                    })
                }
                Some((order, sol)) => {
                    ordering.extend(order.iter().map(|&i| comp.vertices[i]));
                    coloring.extend(comp.pairs.iter().zip(&sol).map(|(&pr, &c)| (pr, used[c as usize])));
                }
            },
        }
    }
    let nodes = meter.nodes;
    let placed: HashSet<u32> = ordering.iter().copied().collect();
    ordering.extend((0..f.vertex_count() as u32).filter(|v| !placed.contains(v)));
    Ok(Report {
        outcome: SearchOutcome::Found(Painting::new(ordering, coloring)),
        nodes,
    })
}

pub fn paints(p: &Palette, f: &ThreeGraph, budget: Budget) -> Result<Verdict> {
    Ok(find_painting(p, f, budget)?.outcome.verdict())
}

pub fn is_deficient(p: &Palette, f: &ThreeGraph, budget: Budget) -> Result<Verdict> {
    Ok(!paints(p, f, budget)?)
}

/// `P` paints no member of `family`.
pub fn is_family_deficient(p: &Palette, family: &[ThreeGraph], budget: Budget) -> Result<Verdict> {
    let mut acc = Verdict::Yes;
    for f in family {
        acc = acc.and(is_deficient(p, f, budget)?);
        if acc == Verdict::No {
            break;
        }
    }
    Ok(acc)
}

/// Number of colorings of `∂F` admitting some compatible ordering.
pub fn count_paintings(p: &Palette, f: &ThreeGraph, budget: Budget) -> Result<Report<Option<u128>>> {
    let (compact, _) = prepare(p)?;
    let mut meter = Meter::new(budget);
    let mut total: u128 = 1;
    for ids in f.edge_components() {
        let comp = Component::build(f, &ids);
        let mut set = HashSet::new();
        if component_search(&comp, &compact, &mut meter, &mut Leaf::All(&mut set)).is_none() {
            return Ok(Report {
                outcome: None,
                nodes: meter.nodes,
            });
        }
        total = total.saturating_mul(set.len() as u128);
        if total == 0 {
            break;
        }
    }
    Ok(Report {
        outcome: Some(total),
        nodes: meter.nodes,
    })
}

/// The linear 3-graph on `∂F` with one edge `{uv, uw, vw}` per edge `uvw`.
/// Vertex `i` of the result is the `i`-th pair of `f.shadow()`.
pub fn shadow_linear(f: &ThreeGraph) -> ThreeGraph {
    let pairs = f.shadow();
    let idx: BTreeMap<Pair, u32> = pairs.iter().enumerate().map(|(i, &p)| (p, i as u32)).collect();
    let g = ThreeGraph::new(
        pairs.len(),
        f.edges().iter().map(|&[a, b, c]| [idx[&[a, b]], idx[&[a, c]], idx[&[b, c]]]),
    )
    .expect("distinct pairs");
    debug_assert!(g.is_linear());
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pal(c: usize, ps: &[[u32; 3]]) -> Palette {
        Palette::new(c, ps.iter().copied()).unwrap()
    }

    fn g(n: usize, es: &[[u32; 3]]) -> ThreeGraph {
        ThreeGraph::new(n, es.iter().copied()).unwrap()
    }

    #[test]
    fn single_edge_painted_by_any_nonempty() {
        let f = g(3, &[[0, 1, 2]]);
        let p = pal(3, &[[2, 0, 1]]);
        let w = find_painting(&p, &f, Budget::DEFAULT).unwrap().outcome.found().unwrap();
        assert!(w.verify(&p, &f));
        assert_eq!(paints(&Palette::empty(3), &f, Budget::DEFAULT).unwrap(), Verdict::No);
    }

    #[test]
    fn cherry_painted_by_rainbow() {
        let p = pal(3, &[[0, 1, 2]]);
        let f = g(4, &[[0, 1, 2], [0, 1, 3]]);
        let w = find_painting(&p, &f, Budget::DEFAULT).unwrap().outcome.found().unwrap();
        assert!(w.verify(&p, &f));
        assert!(w.reversed().verify(&p.reverse(), &f));
    }

    #[test]
    fn k4_minus_not_painted_by_rainbow() {
        let p = pal(3, &[[0, 1, 2]]);
        assert_eq!(paints(&p, &ThreeGraph::k4_minus(), Budget::DEFAULT).unwrap(), Verdict::No);
    }

    #[test]
    fn isolated_vertices_appended() {
        let p = pal(1, &[[0, 0, 0]]);
        let f = g(6, &[[1, 3, 5]]);
        let w = find_painting(&p, &f, Budget::DEFAULT).unwrap().outcome.found().unwrap();
        assert_eq!(w.ordering.len(), 6);
        assert!(w.verify(&p, &f));
    }

    #[test]
    fn tiny_budget_is_unknown() {
        let p = Palette::full(2);
        let f = ThreeGraph::complete(6);
        assert_eq!(paints(&p, &f, Budget(3)).unwrap(), Verdict::Unknown);
    }

    #[test]
    fn counts() {
        let p = pal(2, &[[0, 0, 0]]);
        assert_eq!(count_paintings(&p, &ThreeGraph::empty(4), Budget::DEFAULT).unwrap().outcome, Some(1));
        let e = g(3, &[[0, 1, 2]]);
        assert_eq!(count_paintings(&Palette::empty(2), &e, Budget::DEFAULT).unwrap().outcome, Some(0));
        // a single pattern (a,b,c) with distinct colors: the 6 orderings give 6 maps
        let r = pal(3, &[[0, 1, 2]]);
        assert_eq!(count_paintings(&r, &e, Budget::DEFAULT).unwrap().outcome, Some(6));
        // two disjoint edges multiply
        let two = g(6, &[[0, 1, 2], [3, 4, 5]]);
        assert_eq!(count_paintings(&r, &two, Budget::DEFAULT).unwrap().outcome, Some(36));
    }

    #[test]
    fn shadow_linear_examples() {
        assert_eq!(shadow_linear(&g(3, &[[0, 1, 2]])), g(3, &[[0, 1, 2]]));
        assert_eq!(shadow_linear(&ThreeGraph::empty(4)), ThreeGraph::empty(0));
        let k = shadow_linear(&ThreeGraph::complete(4));
        assert_eq!((k.vertex_count(), k.edge_count()), (6, 4));
        for (i, a) in k.edges().iter().enumerate() {
            for b in &k.edges()[i + 1..] {
                assert_eq!(a.iter().filter(|v| b.contains(v)).count(), 1);
            }
        }
    }

    #[test]
    fn family_deficiency() {
        let p = pal(3, &[[0, 1, 2]]);
        assert_eq!(is_family_deficient(&p, &[], Budget::DEFAULT).unwrap(), Verdict::Yes);
        let fam = [ThreeGraph::k4_minus(), ThreeGraph::complete(4)];
        assert_eq!(is_family_deficient(&p, &fam, Budget::DEFAULT).unwrap(), Verdict::Yes);
        let fam2 = [ThreeGraph::complete(3)];
        assert_eq!(is_family_deficient(&p, &fam2, Budget::DEFAULT).unwrap(), Verdict::No);
    }
}
