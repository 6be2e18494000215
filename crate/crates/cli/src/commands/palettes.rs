use anyhow::{bail, Result};
use palette_core::extremal::{ex_pal, g_nondegenerate, Mode};
use palette_core::hom::{dominates as dominates_op, find_embedding, find_homomorphism, is_isomorphic};
use palette_core::lagrangian::{grid_oracle, is_reduced, maximize_lagrangian, AscentOptions, Reducedness};
use palette_core::painting::{count_paintings, find_painting};
use palette_core::{SearchOutcome, Verdict};
use serde_json::{json, Value};

use super::Ctx;
use crate::cli::{DominatesArgs, ExpalArgs, LagrangianArgs, PaintsArgs, PaletteGraph, ReducedArgs, TwoPalettes};
use crate::output::{big, verdict, Outcome};

pub fn paints(a: &PaintsArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let p = ctx.inputs.palette("palette", &a.input.palette)?;
    let f = ctx.inputs.graph("graph", &a.input.graph)?;
    ctx.inputs.param("count", a.count);
    let found = find_painting(&p, &f, ctx.budget())?;
    let v = found.outcome.verdict();
    let mut nodes = found.nodes;
    let mut details = json!({ "nodes": found.nodes });
    if let SearchOutcome::Found(w) = found.outcome {
        details["witness"] = serde_json::to_value(w)?;
    }
    let mut exceeded = v == Verdict::Unknown;
    if a.count {
        let c = count_paintings(&p, &f, ctx.budget())?;
        nodes += c.nodes;
        exceeded |= c.outcome.is_none();
        details["count"] = c.outcome.map_or_else(|| json!("unknown"), big);
    }
    Ok(Outcome::new(verdict(v)).details(details).nodes(nodes).exceeded(exceeded))
}

pub fn count(a: &PaletteGraph, ctx: &mut Ctx) -> Result<Outcome> {
    let p = ctx.inputs.palette("palette", &a.palette)?;
    let f = ctx.inputs.graph("graph", &a.graph)?;
    let c = count_paintings(&p, &f, ctx.budget())?;
    let result = c.outcome.map_or_else(|| json!("unknown"), big);
    Ok(Outcome::new(result).nodes(c.nodes).exceeded(c.outcome.is_none()))
}

fn map_details(outcome: SearchOutcome<Vec<u32>>) -> Value {
    match outcome {
        SearchOutcome::Found(map) => json!({ "map": map }),
        _ => json!({}),
    }
}

pub fn hom(a: &TwoPalettes, ctx: &mut Ctx) -> Result<Outcome> {
    let s = ctx.inputs.palette("source", &a.source)?;
    let t = ctx.inputs.palette("target", &a.target)?;
    let r = find_homomorphism(&s, &t, ctx.budget())?;
    let v = r.outcome.verdict();
    Ok(Outcome::new(verdict(v))
        .details(map_details(r.outcome))
        .nodes(r.nodes)
        .exceeded(v == Verdict::Unknown))
}

pub fn iso(a: &TwoPalettes, ctx: &mut Ctx) -> Result<Outcome> {
    let s = ctx.inputs.palette("source", &a.source)?;
    let t = ctx.inputs.palette("target", &a.target)?;
    let v = is_isomorphic(&s, &t, ctx.budget())?;
    let mut out = Outcome::new(verdict(v)).exceeded(v == Verdict::Unknown);
    if v == Verdict::Yes {
        let r = find_embedding(&s, &t, ctx.budget())?;
        out = out.details(map_details(r.outcome)).nodes(r.nodes);
    }
    Ok(out)
}

pub fn dominates(a: &DominatesArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let p = ctx.inputs.palette("palette", &a.palette)?;
    ctx.inputs.param("a", a.a);
    ctx.inputs.param("b", a.b);
    let c = p.color_count() as u32;
    for x in [a.a, a.b] {
        if x == 0 || x > c {
            bail!("color {x} outside 1..={c}");
        }
    }
    Ok(Outcome::new(json!(dominates_op(&p, a.a - 1, a.b - 1)?)))
}

pub fn lagrangian(a: &LagrangianArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let p = ctx.inputs.palette("palette", &a.palette)?;
    let opts = AscentOptions {
        restarts: a.restarts,
        iters: a.iters,
        tol: ctx.tol_or(AscentOptions::default().tol),
        seed: ctx.seed_or_default(),
    };
    ctx.inputs.param("restarts", a.restarts);
    ctx.inputs.param("iters", a.iters);
    let r = maximize_lagrangian(&p, &opts)?;
    let mut result = json!({ "value": r.value, "argmax": r.argmax });
    if let Some(m) = a.grid {
        ctx.inputs.param("grid", m);
        let g = grid_oracle(&p, m)?;
        result["grid_value"] = json!(g.value);
        result["grid_argmax"] = json!(g.argmax);
    }
    let details = json!({ "restarts_used": r.restarts_used, "converged": r.converged });
    Ok(Outcome::new(result).details(details).seed(opts.seed))
}

pub fn reduced(a: &ReducedArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let p = ctx.inputs.palette("palette", &a.palette)?;
    let tol = ctx.tol_or(1e-6);
    let opts = AscentOptions {
        restarts: a.restarts,
        seed: ctx.seed_or_default(),
        ..AscentOptions::default()
    };
    ctx.inputs.param("restarts", a.restarts);
    let r = is_reduced(&p, tol, &opts)?;
    let v = match r.verdict {
        Reducedness::Reduced => Verdict::Yes,
        Reducedness::NotReduced => Verdict::No,
        Reducedness::Inconclusive => Verdict::Unknown,
    };
    Ok(Outcome::new(verdict(v))
        .details(serde_json::to_value(&r)?)
        .seed(opts.seed)
        .definite(v != Verdict::Unknown))
}

pub fn expal(a: &ExpalArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let family = a
        .family
        .iter()
        .enumerate()
        .map(|(i, path)| ctx.inputs.graph(&format!("family[{i}]"), path))
        .collect::<Result<Vec<_>>>()?;
    ctx.inputs.param("n", a.n);
    ctx.inputs.param("nondegenerate", a.nondegenerate);
    let (mode, seed) = if a.heuristic {
        let seed = ctx.seed_or_default();
        ctx.inputs.param("rounds", a.rounds);
        (Mode::Heuristic { rounds: a.rounds, seed }, Some(seed))
    } else {
        (Mode::Exhaustive, None)
    };
    let run = if a.nondegenerate { g_nondegenerate } else { ex_pal };
    let r = run(a.n, &family, mode, ctx.budget())?;
    let mut out = Outcome::new(json!(r.ex_value))
        .nodes(r.nodes_searched)
        .exceeded(!r.optimal && !a.heuristic)
        .definite(r.optimal);
    out = out.details(serde_json::to_value(&r)?);
    if let Some(s) = seed {
        out = out.seed(s);
    }
    Ok(out)
}
