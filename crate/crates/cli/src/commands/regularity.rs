use anyhow::Result;
use palette_core::regularity::{clean as clean_op, regularize as regularize_op, regularize_from, sample_model_sets, ModelOptions, RegularizeOptions};
use palette_core::Partition;
use serde_json::json;

use super::Ctx;
use crate::cli::{CleanArgs, RegularityArgs, RegularizeArgs};
use crate::output::Outcome;

fn options(a: &RegularityArgs, ctx: &mut Ctx) -> RegularizeOptions {
    for (k, v) in [
        ("eps", a.eps.to_string()),
        ("m", a.m.to_string()),
        ("samples", a.samples.to_string()),
        ("max_parts", a.max_parts.to_string()),
        ("exhaustive_limit", a.exhaustive_limit.to_string()),
        ("max_rounds", format!("{:?}", a.max_rounds)),
    ] {
        ctx.inputs.param(k, v);
    }
    RegularizeOptions {
        epsilon: a.eps,
        m: a.m,
        seed: ctx.seed_or_default(),
        audit_samples: a.samples,
        max_parts: a.max_parts,
        exhaustive_limit: a.exhaustive_limit,
        max_rounds: a.max_rounds,
    }
}

pub fn regularize(a: &RegularizeArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let p = ctx.inputs.palette("palette", &a.reg.palette)?;
    let opts = options(&a.reg, ctx);
    let cert = regularize_op(&p, &opts)?;
    let result = json!({
        "complete": cert.complete,
        "parts": cert.partition.part_count(),
        "rounds": cert.rounds,
        "stop": cert.stop,
        "energy": cert.energy,
    });
    Ok(Outcome::new(result)
        .definite(cert.complete)
        .details(serde_json::to_value(&cert)?)
        .seed(opts.seed))
}

pub fn clean(a: &CleanArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let p = ctx.inputs.palette("palette", &a.reg.palette)?;
    let opts = options(&a.reg, ctx);
    ctx.inputs.param("alpha", a.alpha);
    let coarse: Partition = match &a.partition {
        Some(path) => ctx.inputs.json("partition", path)?,
        None => regularize_op(&p, &opts)?.partition,
    };
    let fine = regularize_from(&p, coarse.clone(), &opts, true)?.partition;
    let mut mo = ModelOptions::new(a.reg.eps, a.reg.eps);
    mo.seed = opts.seed;
    mo.audit.seed = opts.seed;
    mo.audit.samples = a.reg.samples;
    mo.audit.exhaustive_limit = a.reg.exhaustive_limit;
    let model = sample_model_sets(&p, &coarse, &fine, &mo)?;
    let report = clean_op(&p, &coarse, &model.sets, a.alpha)?;
    let holds = report.repeated.holds && report.inaccurate.holds && report.sparse.holds && report.class_map_is_homomorphism;
    let result = json!({
        "buckets_hold": holds,
        "model_sets_passed": model.passed,
        "removed": report.removed,
        "remaining": report.cleaned.pattern_count(),
    });
    let details = json!({ "coarse": coarse, "model": model, "report": report });
    Ok(Outcome::new(result)
        .definite(model.passed)
        .details(details)
        .seed(opts.seed))
}
