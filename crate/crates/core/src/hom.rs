//! Homomorphisms between palettes.
//!
//! A homomorphism `source -> target` is a color map `ψ` with
//! `ψ(q) ∈ target` for every pattern `q` of `source`.

use std::sync::Arc;

use crate::csp::{full_domain, Csp, Flow, Table, MAX_VALUES};
use crate::error::{Error, Result};
use crate::palette::Palette;
use crate::search::{Budget, Meter, Report, SearchOutcome, Verdict};

/// Color map `map[source_color] = target_color`.
pub type ColorMap = Vec<u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Any,
    Injective,
}

fn check_target(target: &Palette) -> Result<()> {
    if target.color_count() > MAX_VALUES {
        return Err(Error::TooLarge {
            what: "homomorphism target",
            limit: MAX_VALUES,
            got: target.color_count(),
        });
    }
    Ok(())
}

/// Enumerates homomorphisms in a fixed deterministic order until `visit`
/// returns [`Flow::Stop`]. With `all_colors` false, colors of `source`
/// outside every pattern are sent to the least admissible target color
/// instead of being branched on. Returns `false` if the budget ran out.
fn enumerate(
    source: &Palette,
    target: &Palette,
    kind: Kind,
    all_colors: bool,
    meter: &mut Meter,
    visit: &mut dyn FnMut(&[u32]) -> Flow,
) -> Result<bool> {
    check_target(target)?;
    let n = source.color_count();
    let t = target.color_count();
    if kind == Kind::Injective && n > t {
        return Ok(true);
    }
    if n == 0 {
        visit(&[]);
        return Ok(true);
    }
    if t == 0 {
        return Ok(true);
    }
    let used = source.used_colors();
    let vars: Vec<u32> = if all_colors || kind == Kind::Injective {
        (0..n as u32).collect()
    } else {
        used.iter().copied().collect()
    };
    let mut index = vec![usize::MAX; n];
    for (i, &v) in vars.iter().enumerate() {
        index[v as usize] = i;
    }
    let mut csp = Csp::new(vec![full_domain(t); vars.len()]);
    if kind == Kind::Injective {
        csp = csp.all_different();
    }
    let table: Table = Arc::new(target.patterns().to_vec());
    for p in source.patterns() {
        let v = p.map(|x| index[x as usize]);
        if !csp.add(v, table.clone()) {
            return Ok(true);
        }
    }
    let mut map = vec![0u32; n];
    let finished = csp.solve(meter, &mut |sol| {
        for (i, &v) in vars.iter().enumerate() {
            map[v as usize] = sol[i];
        }
        visit(&map)
    });
    Ok(finished)
}

fn first(
    source: &Palette,
    target: &Palette,
    kind: Kind,
    budget: Budget,
) -> Result<Report<SearchOutcome<ColorMap>>> {
    let mut meter = Meter::new(budget);
    let mut found = None;
    let finished = enumerate(source, target, kind, false, &mut meter, &mut |m| {
        found = Some(m.to_vec());
        Flow::Stop
    })?;
    let outcome = match (found, finished) {
        (Some(m), _) => SearchOutcome::Found(m),
        (None, true) => SearchOutcome::Absent,
        (None, false) => SearchOutcome::BudgetExceeded,
    };
    Ok(Report {
        outcome,
        nodes: meter.nodes,
    })
}

pub fn find_homomorphism(source: &Palette, target: &Palette, budget: Budget) -> Result<Report<SearchOutcome<ColorMap>>> {
    first(source, target, Kind::Any, budget)
}

/// Injective homomorphism: `source` is a subpalette of `target`.
pub fn find_embedding(source: &Palette, target: &Palette, budget: Budget) -> Result<Report<SearchOutcome<ColorMap>>> {
    first(source, target, Kind::Injective, budget)
}

pub fn embedding_exists(source: &Palette, target: &Palette, budget: Budget) -> Result<Verdict> {
    Ok(find_embedding(source, target, budget)?.outcome.verdict())
}

/// `palette` is contained in some blow-up of `base`.
pub fn blowup_containment(palette: &Palette, base: &Palette, budget: Budget) -> Result<Verdict> {
    Ok(find_homomorphism(palette, base, budget)?.outcome.verdict())
}

pub fn is_homomorphism(source: &Palette, target: &Palette, map: &[u32]) -> bool {
    map.len() == source.color_count()
        && map.iter().all(|&c| (c as usize) < target.color_count())
        && source
            .patterns()
            .iter()
            .all(|p| target.contains(&p.map(|x| map[x as usize])))
}

pub fn is_isomorphic(p: &Palette, q: &Palette, budget: Budget) -> Result<Verdict> {
    if p.color_count() != q.color_count() || p.pattern_count() != q.pattern_count() {
        return Ok(Verdict::No);
    }
    if p.color_count() <= crate::palette::CANONICAL_COLOR_LIMIT {
        return Ok(Verdict::from_bool(p.canonical_form()? == q.canonical_form()?));
    }
    // a bijection mapping P into Q with |P| = |Q| maps P onto Q
    embedding_exists(p, q, budget)
}

/// All automorphisms of `p` in enumeration order.
pub fn automorphisms(p: &Palette, budget: Budget) -> Result<Report<Option<Vec<ColorMap>>>> {
    let mut meter = Meter::new(budget);
    let mut out = Vec::new();
    let finished = enumerate(p, p, Kind::Injective, true, &mut meter, &mut |m| {
        out.push(m.to_vec());
        Flow::Continue
    })?;
    Ok(Report {
        outcome: finished.then_some(out),
        nodes: meter.nodes,
    })
}

/// Finds a class map `ψ: C(Q) -> C(P)` with `Q = {q : ψ(q) ∈ P}`, i.e. `Q`
/// is a blow-up of `P` (empty classes allowed).
pub fn find_blowup_structure(q: &Palette, p: &Palette, budget: Budget) -> Result<Report<SearchOutcome<ColorMap>>> {
    let mut meter = Meter::new(budget);
    let mut found = None;
    let finished = enumerate(q, p, Kind::Any, true, &mut meter, &mut |m| {
        let exact = p.patterns().iter().all(|&[i, j, k]| {
            let class = |c: u32| m.iter().enumerate().filter(move |(_, &x)| x == c).map(|(v, _)| v as u32);
            class(i).all(|x| class(j).all(|y| class(k).all(|z| q.contains(&[x, y, z]))))
        });
        if exact {
            found = Some(m.to_vec());
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    let outcome = match (found, finished) {
        (Some(m), _) => SearchOutcome::Found(m),
        (None, true) => SearchOutcome::Absent,
        (None, false) => SearchOutcome::BudgetExceeded,
    };
    Ok(Report {
        outcome,
        nodes: meter.nodes,
    })
}

/// Whether every way of placing `r` inside a blow-up of `p` puts the
/// classes `labels` into distinct blow-up classes up to an automorphism
/// of `p`. `labels[x]` is the intended class of color `x` of `r`.
pub fn is_rigid(r: &Palette, p: &Palette, labels: &[u32], budget: Budget) -> Result<Verdict> {
    if labels.len() != r.color_count() {
        return Err(Error::DimensionMismatch {
            expected: r.color_count(),
            got: labels.len(),
        });
    }
    let autos = match automorphisms(p, budget)?.outcome {
        Some(a) => a,
        None => return Ok(Verdict::Unknown),
    };
    let mut meter = Meter::new(budget);
    let mut any = false;
    let mut rigid = true;
    let finished = enumerate(r, p, Kind::Any, true, &mut meter, &mut |psi| {
        any = true;
        let explained = autos
            .iter()
            .any(|h| labels.iter().zip(psi).all(|(&u, &v)| h[u as usize] == v));
        if explained {
            Flow::Continue
        } else {
            rigid = false;
            Flow::Stop
        }
    })?;
    Ok(match (rigid, finished) {
        (false, _) => Verdict::No,
        (true, true) => Verdict::from_bool(any),
        (true, false) => Verdict::Unknown,
    })
}

/// Whether `b` dominates `a`: replacing any nonempty set of occurrences of
/// `a` by `b` in a pattern of `P` gives a pattern of `P`.
pub fn dominates(p: &Palette, a: u32, b: u32) -> Result<bool> {
    for x in [a, b] {
        if x as usize >= p.color_count() {
            return Err(Error::ColorOutOfRange {
                color: x,
                color_count: p.color_count(),
            });
        }
    }
    if a == b {
        return Err(Error::InvalidArgument("domination needs two distinct colors".into()));
    }
    Ok(p.patterns().iter().all(|pat| {
        let occ: Vec<usize> = (0..3).filter(|&i| pat[i] == a).collect();
        (1u32..1 << occ.len()).all(|subset| {
            let mut q = *pat;
            for (bit, &i) in occ.iter().enumerate() {
                if subset >> bit & 1 == 1 {
                    q[i] = b;
                }
            }
            p.contains(&q)
        })
    }))
}
