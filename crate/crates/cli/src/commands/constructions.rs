use anyhow::{bail, Result};
use palette_core::constructions::{
    d_eta_density_audit, palette_construction, palette_from_slice, random_reduced, reduced_from_palette,
    reduced_map_exists, AuditMode, DensityAudit, Reduced3Graph, Slice,
};
use palette_core::format::write_palette;
use palette_core::lagrangian::lambda_eval;
use palette_core::{SearchOutcome, Verdict, WeightVector};
use serde_json::{json, Value};

use super::Ctx;
use crate::cli::{AuditArgs, AuditControl, ConstructArgs, Reduced3Command};
use crate::output::{verdict, Outcome};

fn audit_result(a: &DensityAudit) -> Value {
    json!({
        "dense": a.dense,
        "mode": a.mode,
        "evidence_only": a.mode == AuditMode::Sampled && a.dense,
    })
}

fn run_audit(
    g: &palette_core::ThreeGraph,
    d: f64,
    eta: f64,
    control: &AuditControl,
    seed: u64,
    ctx: &mut Ctx,
) -> Result<DensityAudit> {
    ctx.inputs.param("d", d);
    ctx.inputs.param("eta", eta);
    ctx.inputs.param("strategy", format!("{:?}", control.strategy));
    ctx.inputs.param("audit_samples", control.audit_samples);
    Ok(d_eta_density_audit(g, d, eta, control.strategy.into(), control.audit_samples, seed)?)
}

pub fn construct(a: &ConstructArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let Some(seed) = ctx.global.seed else {
        bail!("construct requires --seed");
    };
    ctx.inputs.param("seed", seed);
    let p = ctx.inputs.palette("palette", &a.palette)?;
    ctx.inputs.param("weights", format!("{:?}", a.weights));
    ctx.inputs.param("n", a.n);
    let x = WeightVector::new(a.weights.clone())?;
    let c = palette_construction(&p, &x, a.n, seed)?;
    let n = a.n as f64;
    let triples = n * (n - 1.0) * (n - 2.0) / 6.0;
    let mut result = json!({
        "edges": c.graph.edge_count(),
        "density": c.graph.edge_count() as f64 / triples,
        "lambda": lambda_eval(&p, &x)?,
    });
    let mut details = json!({ "graph": c.graph, "coloring": c.coloring });
    if let Some(de) = &a.audit {
        let &[d, eta] = de.as_slice() else {
            bail!("--audit takes `d,eta`");
        };
        let audit = run_audit(&c.graph, d, eta, &a.control, seed, ctx)?;
        result["audit"] = audit_result(&audit);
        details["audit"] = serde_json::to_value(&audit)?;
    }
    Ok(Outcome::new(result).details(details).seed(seed))
}

pub fn audit(a: &AuditArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let g = ctx.inputs.graph("graph", &a.graph)?;
    let seed = ctx.seed_or_default();
    let audit = run_audit(&g, a.d, a.eta, &a.control, seed, ctx)?;
    Ok(Outcome::new(audit_result(&audit))
        .details(serde_json::to_value(&audit)?)
        .seed(seed))
}

pub fn reduced3(cmd: &Reduced3Command, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        Reduced3Command::FromPalette { palette, t } => {
            let g = ctx.inputs.palette("palette", palette)?;
            ctx.inputs.param("t", t);
            let (reduced, slice) = reduced_from_palette(&g, *t)?;
            Ok(Outcome::new(json!({ "reduced": reduced, "slice": slice })))
        }
        Reduced3Command::Random { t, size, p } => {
            let seed = ctx.seed_or_default();
            ctx.inputs.param("t", t);
            ctx.inputs.param("size", size);
            ctx.inputs.param("p", p);
            let reduced = random_reduced(*t, *size, *p, seed)?;
            Ok(Outcome::new(json!({ "reduced": reduced })).seed(seed))
        }
        Reduced3Command::Map { graph, reduced } => {
            let f = ctx.inputs.graph("graph", graph)?;
            let a: Reduced3Graph = ctx.inputs.json("reduced", reduced)?;
            let r = reduced_map_exists(&f, &a, ctx.budget())?;
            let v = r.outcome.verdict();
            let details = match r.outcome {
                SearchOutcome::Found(m) => json!({ "map": m }),
                _ => json!({}),
            };
            Ok(Outcome::new(verdict(v))
                .details(details)
                .nodes(r.nodes)
                .exceeded(v == Verdict::Unknown))
        }
        Reduced3Command::Slice { reduced, slice } => {
            let a: Reduced3Graph = ctx.inputs.json("reduced", reduced)?;
            let s: Slice = ctx.inputs.json("slice", slice)?;
            let p = palette_from_slice(&a, &s)?;
            Ok(Outcome::new(json!({ "palette": p, "text": write_palette(&p) })))
        }
    }
}
