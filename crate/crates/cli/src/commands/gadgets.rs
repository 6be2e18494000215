use anyhow::{bail, Result};
use palette_core::gadgets::{
    build_g_sigma, build_g_sigma_with, build_triangle_system, hypergraph_from_colored_graph, natural_painting,
    verify_gsigma_claim, Permutation,
};
use palette_core::SearchOutcome;
use serde_json::json;

use super::Ctx;
use crate::cli::GadgetCommand;
use crate::output::Outcome;

pub fn run(cmd: &GadgetCommand, ctx: &mut Ctx) -> Result<Outcome> {
    match cmd {
        GadgetCommand::Gsigma { perm, tuple, verify } => {
            let sigma: Permutation = perm.parse()?;
            ctx.inputs.param("perm", &sigma);
            ctx.inputs.param("verify", verify);
            let g = match tuple {
                None => build_g_sigma(&sigma)?,
                Some(t) => {
                    ctx.inputs.param("tuple", format!("{t:?}"));
                    let &[a, b, c, d] = t.as_slice() else {
                        bail!("--tuple takes four entries");
                    };
                    if t.contains(&0) {
                        bail!("--tuple entries are 1-based");
                    }
                    build_g_sigma_with(&sigma, [a - 1, b - 1, c - 1, d - 1])?
                }
            };
            let mut result = json!({
                "sigma": sigma.to_string(),
                "vertex_count": g.vertex_count,
                "edges": g.edges,
                "identities_hold": g.satisfies_identities(),
                "linear": g.is_linear(),
            });
            let mut out = Outcome::new(json!(null));
            if *verify {
                let r = verify_gsigma_claim(&g, ctx.budget())?;
                out = out.nodes(r.nodes);
                match r.outcome {
                    SearchOutcome::Found(cert) => {
                        result["certificate"] = json!(cert);
                        result["claim_holds"] = json!(cert.counterexamples == 0);
                    }
                    _ => {
                        result["claim_holds"] = json!("unknown");
                        out = out.exceeded(true);
                    }
                }
            }
            out.result = result;
            Ok(out.details(json!({ "tuple": g.tuple })))
        }
        GadgetCommand::Triangles { palette } => {
            let q = ctx.inputs.palette("palette", palette)?;
            let g = build_triangle_system(&q)?;
            let h = hypergraph_from_colored_graph(&g, &q)?;
            let painting = natural_painting(&g, &h)?;
            let result = json!({
                "vertex_count": g.vertex_count,
                "triangles": h.edge_count(),
                "painting_verified": painting.verify(&q, &h),
            });
            Ok(Outcome::new(result).details(json!({ "graph": g, "hypergraph": h, "painting": painting })))
        }
    }
}
