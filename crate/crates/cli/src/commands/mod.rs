mod constructions;
mod gadgets;
mod palettes;
mod regularity;

use anyhow::Result;
use palette_core::Budget;

use crate::cli::{Command, Global, GadgetCommand, Reduced3Command};
use crate::input::Inputs;
use crate::output::Outcome;

/// Shared run settings.
pub struct Ctx<'a> {
    pub global: &'a Global,
    pub inputs: Inputs,
}

impl Ctx<'_> {
    pub fn budget(&self) -> Budget {
        Budget(self.global.budget)
    }

    pub fn seed_or_default(&mut self) -> u64 {
        let seed = self.global.seed.unwrap_or(0);
        self.inputs.param("seed", seed);
        seed
    }

    pub fn tol_or(&mut self, default: f64) -> f64 {
        let tol = self.global.tol.unwrap_or(default);
        self.inputs.param("tol", tol);
        tol
    }
}

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Paints(_) => "paints",
        Command::Count(_) => "count",
        Command::Hom(_) => "hom",
        Command::Iso(_) => "iso",
        Command::Dominates(_) => "dominates",
        Command::Lagrangian(_) => "lagrangian",
        Command::Reduced(_) => "reduced",
        Command::Expal(_) => "expal",
        Command::Regularize(_) => "regularize",
        Command::Clean(_) => "clean",
        Command::Construct(_) => "construct",
        Command::Audit(_) => "audit",
        Command::Gadget(GadgetCommand::Gsigma { .. }) => "gadget gsigma",
        Command::Gadget(GadgetCommand::Triangles { .. }) => "gadget triangles",
        Command::Reduced3(Reduced3Command::FromPalette { .. }) => "reduced3 from-palette",
        Command::Reduced3(Reduced3Command::Random { .. }) => "reduced3 random",
        Command::Reduced3(Reduced3Command::Map { .. }) => "reduced3 map",
        Command::Reduced3(Reduced3Command::Slice { .. }) => "reduced3 slice",
    }
}

pub fn run(cmd: &Command, ctx: &mut Ctx) -> Result<Outcome> {
    ctx.inputs.param("budget", ctx.global.budget);
    match cmd {
        Command::Paints(a) => palettes::paints(a, ctx),
        Command::Count(a) => palettes::count(a, ctx),
        Command::Hom(a) => palettes::hom(a, ctx),
        Command::Iso(a) => palettes::iso(a, ctx),
        Command::Dominates(a) => palettes::dominates(a, ctx),
        Command::Lagrangian(a) => palettes::lagrangian(a, ctx),
        Command::Reduced(a) => palettes::reduced(a, ctx),
        Command::Expal(a) => palettes::expal(a, ctx),
        Command::Regularize(a) => regularity::regularize(a, ctx),
        Command::Clean(a) => regularity::clean(a, ctx),
        Command::Construct(a) => constructions::construct(a, ctx),
        Command::Audit(a) => constructions::audit(a, ctx),
        Command::Gadget(g) => gadgets::run(g, ctx),
        Command::Reduced3(r) => constructions::reduced3(r, ctx),
    }
}
