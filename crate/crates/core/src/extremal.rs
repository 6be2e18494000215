//! Palette Turán numbers and the finite data of near-extremal palettes.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ThreeGraph;
use crate::hom::find_blowup_structure;
use crate::painting::{is_family_deficient, paints};
use crate::palette::{for_each_permutation, is_nondegenerate_pattern, Palette, Pattern};
use crate::search::{Budget, Meter, SearchOutcome, Verdict};

/// Largest color count for the exhaustive pattern-set search.
pub const EXHAUSTIVE_COLOR_LIMIT: usize = 4;
/// Largest class-assignment count for [`best_blowup_fit`] in exhaustive mode.
pub const FIT_ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Heuristic { rounds: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub n: usize,
    pub family: Vec<ThreeGraph>,
    pub nondegenerate: bool,
    pub ex_value: usize,
    /// Canonical forms of the maximum palettes found, sorted.
    pub extremal_palettes: Vec<Palette>,
    pub nodes_searched: u64,
    /// `true` when `ex_value` is proven maximal.
    pub optimal: bool,
    pub mode: Mode,
}

fn candidate_patterns(n: usize, nondegenerate: bool) -> Vec<Pattern> {
    Palette::full(n)
        .patterns()
        .iter()
        .copied()
        .filter(|&p| !nondegenerate || is_nondegenerate_pattern(p))
        .collect()
}

fn check_family(n: usize, family: &[ThreeGraph], budget: Budget) -> Result<()> {
    if is_family_deficient(&Palette::empty(n), family, budget)? != Verdict::Yes {
        return Err(Error::Degenerate(
            "the empty palette paints a family member, so no palette is deficient".into(),
        ));
    }
    Ok(())
}

struct Exhaustive<'a> {
    n: usize,
    pats: Vec<Pattern>,
    /// `perm_maps[s][i]` is the index of pattern `i` under color permutation `s`.
    perm_maps: Vec<Vec<usize>>,
    family: &'a [ThreeGraph],
    paint_budget: Budget,
    cache: HashMap<u64, Verdict>,
    meter: Meter,
    best: usize,
    winners: BTreeSet<u64>,
    unsure: bool,
}

impl Exhaustive<'_> {
    fn canonical(&self, mask: u64) -> u64 {
        self.perm_maps
            .iter()
            .map(|map| {
                let mut out = 0u64;
                let mut m = mask;
                while m != 0 {
                    let i = m.trailing_zeros() as usize;
                    m &= m - 1;
                    out |= 1 << map[i];
                }
                out
            })
            .min()
            .unwrap_or(mask)
    }

    fn palette(&self, mask: u64) -> Palette {
        Palette::new(
            self.n,
            (0..self.pats.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.pats[i]),
        )
        .expect("in range")
    }

    fn deficient(&mut self, mask: u64) -> Result<Verdict> {
        let key = self.canonical(mask);
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let v = is_family_deficient(&self.palette(key), self.family, self.paint_budget)?;
        self.cache.insert(key, v);
        Ok(v)
    }

    fn dfs(&mut self, i: usize, mask: u64, count: usize) -> Result<bool> {
        if !self.meter.tick() {
            return Ok(false);
        }
        let remaining = self.pats.len() - i;
        if count + remaining < self.best {
            return Ok(true);
        }
        if i == self.pats.len() {
            if count > self.best {
                self.best = count;
                self.winners.clear();
            }
            let key = self.canonical(mask);
            self.winners.insert(key);
            return Ok(true);
        }
        let with = mask | 1 << i;
        match self.deficient(with)? {
            Verdict::Yes => {
                if !self.dfs(i + 1, with, count + 1)? {
                    return Ok(false);
                }
            }
            Verdict::Unknown => self.unsure = true,
            Verdict::No => {}
        }
        self.dfs(i + 1, mask, count)
    }
}

fn perm_maps(n: usize, pats: &[Pattern]) -> Vec<Vec<usize>> {
    let index: HashMap<Pattern, usize> = pats.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut maps = Vec::new();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    for_each_permutation(&mut perm, &mut |s| {
        maps.push(pats.iter().map(|p| index[&p.map(|x| s[x as usize])]).collect());
    });
    maps
}

fn exhaustive(n: usize, family: &[ThreeGraph], nondegenerate: bool, budget: Budget) -> Result<ExtremalReport> {
    if n > EXHAUSTIVE_COLOR_LIMIT {
        return Err(Error::TooLarge {
            what: "exhaustive extremal search",
            limit: EXHAUSTIVE_COLOR_LIMIT,
            got: n,
        });
    }
    let pats = candidate_patterns(n, nondegenerate);
    let mut s = Exhaustive {
        n,
        perm_maps: perm_maps(n, &pats),
        pats,
        family,
        paint_budget: budget,
        cache: HashMap::new(),
        meter: Meter::new(budget),
        best: 0,
        winners: BTreeSet::new(),
        unsure: false,
    };
    let finished = s.dfs(0, 0, 0)?;
    let mut palettes: Vec<Palette> = s
        .winners
        .iter()
        .map(|&m| s.palette(m).canonical_form())
        .collect::<Result<BTreeSet<_>>>()?
        .into_iter()
        .collect();
    palettes.sort();
    Ok(ExtremalReport {
        n,
        family: family.to_vec(),
        nondegenerate,
        ex_value: s.best,
        extremal_palettes: palettes,
        nodes_searched: s.meter.nodes,
        optimal: finished && !s.unsure,
        mode: Mode::Exhaustive,
    })
}

fn heuristic(
    n: usize,
    family: &[ThreeGraph],
    nondegenerate: bool,
    budget: Budget,
    rounds: usize,
    seed: u64,
) -> Result<ExtremalReport> {
    let pats = candidate_patterns(n, nondegenerate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Vec<Pattern> = Vec::new();
    let mut winners = BTreeSet::new();
    let mut nodes = 0u64;
    for _ in 0..rounds.max(1) {
        let mut order = pats.clone();
        order.shuffle(&mut rng);
        let mut chosen: Vec<Pattern> = Vec::new();
        for p in order {
            chosen.push(p);
            nodes += 1;
            let pal = Palette::new(n, chosen.iter().copied())?;
            if is_family_deficient(&pal, family, budget)? != Verdict::Yes {
                chosen.pop();
            }
        }
        if chosen.len() > best.len() {
            best = chosen.clone();
            winners.clear();
        }
        if chosen.len() == best.len() {
            let pal = Palette::new(n, chosen)?;
            winners.insert(if n <= crate::palette::CANONICAL_COLOR_LIMIT {
                pal.canonical_form()?
            } else {
                pal
            });
        }
    }
    Ok(ExtremalReport {
        n,
        family: family.to_vec(),
        nondegenerate,
        ex_value: best.len(),
        extremal_palettes: winners.into_iter().collect(),
        nodes_searched: nodes,
        optimal: false,
        mode: Mode::Heuristic { rounds, seed },
    })
}

/// `ex_pal(n, family)`: the largest family-deficient palette on `n` colors.
pub fn ex_pal(n: usize, family: &[ThreeGraph], mode: Mode, budget: Budget) -> Result<ExtremalReport> {
    extremal(n, family, false, mode, budget)
}

/// `g(n, family)`: as [`ex_pal`] over palettes without degenerate patterns.
pub fn g_nondegenerate(n: usize, family: &[ThreeGraph], mode: Mode, budget: Budget) -> Result<ExtremalReport> {
    extremal(n, family, true, mode, budget)
}

fn extremal(n: usize, family: &[ThreeGraph], nondegenerate: bool, mode: Mode, budget: Budget) -> Result<ExtremalReport> {
    check_family(n, family, budget)?;
    match mode {
        Mode::Exhaustive => exhaustive(n, family, nondegenerate, budget),
        Mode::Heuristic { rounds, seed } => heuristic(n, family, nondegenerate, budget, rounds, seed),
    }
}

/// `|P △ Q|`.
pub fn edit_distance(p: &Palette, q: &Palette) -> Result<usize> {
    if p.color_count() != q.color_count() {
        return Err(Error::DimensionMismatch {
            expected: p.color_count(),
            got: q.color_count(),
        });
    }
    let a: BTreeSet<&Pattern> = p.patterns().iter().collect();
    let b: BTreeSet<&Pattern> = q.patterns().iter().collect();
    Ok(a.symmetric_difference(&b).count())
}

/// Class map placing `sizes[i]` consecutive colors in class `i`.
pub fn class_map_from_sizes(sizes: &[usize]) -> Vec<u32> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| std::iter::repeat_n(i as u32, s))
        .collect()
}

/// Missing patterns `A = S ∖ Q`, bad patterns `B = Q ∖ S` and `Δ(B)` for
/// the blow-up `S` of `P` given by a class map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingBad {
    pub missing: Vec<Pattern>,
    pub bad: Vec<Pattern>,
    pub delta_bad: usize,
}

fn check_classes(q: &Palette, p: &Palette, class_of: &[u32]) -> Result<()> {
    if class_of.len() != q.color_count() {
        return Err(Error::DimensionMismatch {
            expected: q.color_count(),
            got: class_of.len(),
        });
    }
    if let Some(&c) = class_of.iter().find(|&&c| c as usize >= p.color_count()) {
        return Err(Error::ColorOutOfRange {
            color: c,
            color_count: p.color_count(),
        });
    }
    Ok(())
}

pub fn missing_bad(q: &Palette, p: &Palette, class_of: &[u32]) -> Result<MissingBad> {
    check_classes(q, p, class_of)?;
    let in_s = |t: &Pattern| p.contains(&t.map(|x| class_of[x as usize]));
    let missing: Vec<Pattern> = Palette::full(q.color_count())
        .patterns()
        .iter()
        .filter(|t| in_s(t) && !q.contains(t))
        .copied()
        .collect();
    let bad: Vec<Pattern> = q.patterns().iter().filter(|t| !in_s(t)).copied().collect();
    let mut per_color = vec![0usize; q.color_count()];
    for t in &bad {
        let distinct: BTreeSet<u32> = t.iter().copied().collect();
        for c in distinct {
            per_color[c as usize] += 1;
        }
    }
    Ok(MissingBad {
        missing,
        bad,
        delta_bad: per_color.into_iter().max().unwrap_or(0),
    })
}

fn bad_count(q: &Palette, p: &Palette, class_of: &[u32]) -> usize {
    q.patterns()
        .iter()
        .filter(|t| !p.contains(&t.map(|x| class_of[x as usize])))
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub class_of: Vec<u32>,
    pub bad: usize,
    /// Exhaustive mode: proven minimum. Heuristic mode: always `false`.
    pub exact: bool,
}

/// Class map of `C(Q)` into `C(P)` minimizing `|Q ∖ S|`.
pub fn best_blowup_fit(q: &Palette, p: &Palette, mode: Mode) -> Result<BlowupFit> {
    let n = q.color_count();
    let t = p.color_count();
    if t == 0 {
        return Err(Error::Degenerate("target palette has no colors".into()));
    }
    match mode {
        Mode::Exhaustive => {
            let count = (t as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if count > FIT_ENUMERATION_LIMIT {
                return Err(Error::EnumerationTooLarge {
                    count,
                    limit: FIT_ENUMERATION_LIMIT,
                });
            }
            let mut class_of = vec![0u32; n];
            let mut best = (bad_count(q, p, &class_of), class_of.clone());
            // odometer in lexicographic order
            loop {
                let mut i = n;
                loop {
                    if i == 0 {
                        return Ok(BlowupFit {
                            class_of: best.1,
                            bad: best.0,
                            exact: true,
                        });
                    }
                    i -= 1;
                    class_of[i] += 1;
                    if (class_of[i] as usize) < t {
                        break;
                    }
                    class_of[i] = 0;
                }
                let b = bad_count(q, p, &class_of);
                if b < best.0 {
                    best = (b, class_of.clone());
                }
            }
        }
        Mode::Heuristic { rounds, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best: Option<(usize, Vec<u32>)> = None;
            for _ in 0..rounds.max(1) {
                let mut class_of: Vec<u32> = (0..n).map(|_| rng.random_range(0..t as u32)).collect();
                let mut cur = bad_count(q, p, &class_of);
                loop {
                    let mut improved = false;
                    for v in 0..n {
                        let keep = class_of[v];
                        for c in 0..t as u32 {
                            if c == keep {
                                continue;
                            }
                            class_of[v] = c;
                            let b = bad_count(q, p, &class_of);
                            if b < cur {
                                cur = b;
                                improved = true;
                                break;
                            }
                            class_of[v] = keep;
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                if best.as_ref().is_none_or(|(b, m)| (cur, &class_of) < (*b, m)) {
                    best = Some((cur, class_of));
                }
            }
            let (bad, class_of) = best.expect("at least one round");
            Ok(BlowupFit {
                class_of,
                bad,
                exact: false,
            })
        }
    }
}

/// All 3-graphs on `k` vertices with at least one edge, up to isomorphism,
/// for `k <= 5`.
pub fn small_three_graphs(k: usize) -> Vec<ThreeGraph> {
    let all = ThreeGraph::complete(k);
    let m = all.edge_count();
    assert!(m <= 10, "too many vertices");
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u32..1 << m {
        let g = ThreeGraph::new(k, (0..m).filter(|i| mask >> i & 1 == 1).map(|i| all.edges()[i])).expect("valid");
        let mut perm: Vec<u32> = (0..k as u32).collect();
        let mut canon: Option<ThreeGraph> = None;
        for_each_permutation(&mut perm, &mut |s| {
            let h = g.relabel(s, k).expect("permutation");
            if canon.as_ref().is_none_or(|c| h < *c) {
                canon = Some(h);
            }
        });
        if seen.insert(canon.expect("nonempty")) {
            out.push(g);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCheck {
    pub family: Vec<ThreeGraph>,
    pub reports: Vec<ExtremalReport>,
    /// For each report, which extremal palettes are blow-ups of `P` or `rev(P)`.
    pub is_blowup: Vec<Vec<Verdict>>,
}

/// Builds the family of 3-graphs on at most four vertices not painted by
/// `p` and checks whether every extremal palette for it is a blow-up of
/// `p` or `reverse(p)`.
pub fn shape_check(p: &Palette, ns: &[usize], budget: Budget) -> Result<ShapeCheck> {
    let mut family = Vec::new();
    for k in 3..=4 {
        for g in small_three_graphs(k) {
            if paints(p, &g, budget)? == Verdict::No {
                family.push(g);
            }
        }
    }
    let rev = p.reverse();
    let mut reports = Vec::new();
    let mut is_blowup = Vec::new();
    for &n in ns {
        let r = ex_pal(n, &family, Mode::Exhaustive, budget)?;
        let flags = r
            .extremal_palettes
            .iter()
            .map(|q| {
                let a = find_blowup_structure(q, p, budget)?.outcome;
                let b = find_blowup_structure(q, &rev, budget)?.outcome;
                Ok(match (a, b) {
                    (SearchOutcome::Found(_), _) | (_, SearchOutcome::Found(_)) => Verdict::Yes,
                    (SearchOutcome::Absent, SearchOutcome::Absent) => Verdict::No,
                    _ => Verdict::Unknown,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        reports.push(r);
        is_blowup.push(flags);
    }
    Ok(ShapeCheck {
        family,
        reports,
        is_blowup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> ThreeGraph {
        ThreeGraph::complete(3)
    }

    #[test]
    fn trivial_families() {
        for n in 1..=3 {
            let r = ex_pal(n, &[edge()], Mode::Exhaustive, Budget::DEFAULT).unwrap();
            assert_eq!((r.ex_value, r.optimal), (0, true));
            let r = ex_pal(n, &[], Mode::Exhaustive, Budget::DEFAULT).unwrap();
            assert_eq!(r.ex_value, n * n * n);
            assert_eq!(r.extremal_palettes, vec![Palette::full(n)]);
        }
    }

    #[test]
    fn nondegenerate_trivial() {
        let r = g_nondegenerate(4, &[], Mode::Exhaustive, Budget::DEFAULT).unwrap();
        assert_eq!(r.ex_value, 24);
        assert_eq!(g_nondegenerate(2, &[], Mode::Exhaustive, Budget::DEFAULT).unwrap().ex_value, 0);
    }

    #[test]
    fn edgeless_member_rejected() {
        assert!(ex_pal(2, &[ThreeGraph::empty(3)], Mode::Exhaustive, Budget::DEFAULT).is_err());
    }

    #[test]
    fn missing_bad_basics() {
        let p = Palette::new(2, [[0, 1, 1]]).unwrap();
        let s = p.blow_up(&[1, 2]).unwrap();
        let mb = missing_bad(&s.palette, &p, &s.class_of).unwrap();
        assert!(mb.missing.is_empty() && mb.bad.is_empty() && mb.delta_bad == 0);
        let mut pats = s.palette.patterns().to_vec();
        pats.pop();
        pats.push([2, 2, 2]);
        let q = Palette::new(3, pats).unwrap();
        let mb = missing_bad(&q, &p, &s.class_of).unwrap();
        assert_eq!((mb.missing.len(), mb.bad, mb.delta_bad), (1, vec![[2, 2, 2]], 1));
    }

    #[test]
    fn fit_exact_blowup() {
        let p = Palette::new(2, [[0, 1, 1], [1, 0, 0]]).unwrap();
        let s = p.blow_up(&[2, 3]).unwrap();
        let fit = best_blowup_fit(&s.palette, &p, Mode::Exhaustive).unwrap();
        assert_eq!(fit.bad, 0);
        let h = best_blowup_fit(&s.palette, &p, Mode::Heuristic { rounds: 10, seed: 1 }).unwrap();
        assert_eq!(h.bad, 0);
    }

    #[test]
    fn small_graph_counts() {
        assert_eq!(small_three_graphs(3).len(), 1);
        // 1, 2, 3, 4 edges on four vertices
        assert_eq!(small_three_graphs(4).len(), 4);
    }

    #[test]
    fn edit_distance_basics() {
        let p = Palette::new(2, [[0, 1, 1]]).unwrap();
        assert_eq!(edit_distance(&p, &p).unwrap(), 0);
        assert_eq!(edit_distance(&Palette::empty(3), &Palette::full(3)).unwrap(), 27);
        assert!(edit_distance(&p, &Palette::empty(3)).is_err());
    }
}
