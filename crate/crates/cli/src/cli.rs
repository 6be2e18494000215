use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use palette_core::constructions::AuditStrategy;

#[derive(Debug, Parser)]
#[command(name = "palette", version, about = "Palettes, paintings and palette Lagrangians of 3-graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Node limit for exhaustive searches.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub budget: u64,
    /// Seed for randomized subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Numerical tolerance, where the subcommand uses one.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pub json_pretty: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a palette paints a 3-graph.
    Paints(PaintsArgs),
    /// Count shadow colorings admitting a painting.
    Count(PaletteGraph),
    /// Search for a homomorphism between palettes.
    Hom(TwoPalettes),
    /// Decide palette isomorphism.
    Iso(TwoPalettes),
    /// Check whether color `a` dominates color `b`.
    Dominates(DominatesArgs),
    /// Maximize the palette Lagrangian.
    Lagrangian(LagrangianArgs),
    /// Check that every pattern deletion lowers the Lagrangian.
    Reduced(ReducedArgs),
    /// Palette extremal number of a family.
    Expal(ExpalArgs),
    /// Run the weak regularity loop.
    Regularize(RegularizeArgs),
    /// Regularize, sample model sets and clean.
    Clean(CleanArgs),
    /// Sample the random construction of a palette.
    Construct(ConstructArgs),
    /// Audit a 3-graph for (d, eta)-density.
    Audit(AuditArgs),
    /// Ordered Ramsey gadgets.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Reduced 3-graphs.
    #[command(subcommand)]
    Reduced3(Reduced3Command),
}

#[derive(Debug, Args)]
pub struct PaletteGraph {
    #[arg(long)]
    pub palette: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
}

#[derive(Debug, Args)]
pub struct PaintsArgs {
    #[command(flatten)]
    pub input: PaletteGraph,
    /// Also count shadow colorings.
    #[arg(long)]
    pub count: bool,
}

#[derive(Debug, Args)]
pub struct TwoPalettes {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
}

#[derive(Debug, Args)]
pub struct DominatesArgs {
    #[arg(long)]
    pub palette: PathBuf,
    /// 1-based color.
    #[arg(long)]
    pub a: u32,
    /// 1-based color.
    #[arg(long)]
    pub b: u32,
}

#[derive(Debug, Args)]
pub struct LagrangianArgs {
    #[arg(long)]
    pub palette: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    /// Also evaluate the simplex grid with this denominator.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReducedArgs {
    #[arg(long)]
    pub palette: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
}

#[derive(Debug, Args)]
pub struct ExpalArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated 3-graph files.
    #[arg(long, value_delimiter = ',')]
    pub family: Vec<PathBuf>,
    /// Restrict to non-degenerate palettes.
    #[arg(long)]
    pub nondegenerate: bool,
    #[arg(long, conflicts_with = "heuristic")]
    pub exhaustive: bool,
    #[arg(long)]
    pub heuristic: bool,
    /// Local search rounds in heuristic mode.
    #[arg(long, default_value_t = 200)]
    pub rounds: usize,
}

#[derive(Debug, Args)]
pub struct RegularityArgs {
    #[arg(long)]
    pub palette: PathBuf,
    #[arg(long)]
    pub eps: f64,
    /// Initial number of parts.
    #[arg(long)]
    pub m: usize,
    /// Random witness candidates per audited triple.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 64)]
    pub max_parts: usize,
    /// Part size up to which audits are exhaustive.
    #[arg(long, default_value_t = 6)]
    pub exhaustive_limit: usize,
    #[arg(long)]
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RegularizeArgs {
    #[command(flatten)]
    pub reg: RegularityArgs,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[command(flatten)]
    pub reg: RegularityArgs,
    #[arg(long)]
    pub alpha: f64,
    /// Coarse partition as JSON; regularized from scratch when absent.
    #[arg(long)]
    pub partition: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Strategy {
    Auto,
    Exhaustive,
    Sampled,
}

impl From<Strategy> for AuditStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Auto => AuditStrategy::Auto,
            Strategy::Exhaustive => AuditStrategy::Exhaustive,
            Strategy::Sampled => AuditStrategy::Sampled,
        }
    }
}

#[derive(Debug, Args)]
pub struct AuditControl {
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    pub strategy: Strategy,
    /// Random subsets per grid size in sampled mode.
    #[arg(long, default_value_t = 32)]
    pub audit_samples: usize,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub palette: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    #[arg(long)]
    pub n: usize,
    /// Run a density audit with `d,eta`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub audit: Option<Vec<f64>>,
    #[command(flatten)]
    pub control: AuditControl,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub d: f64,
    #[arg(long)]
    pub eta: f64,
    #[command(flatten)]
    pub control: AuditControl,
}

#[derive(Debug, Subcommand)]
pub enum GadgetCommand {
    /// Build the three-edge gadget for a permutation.
    Gsigma {
        /// 1-based, e.g. `3,1,4,2`.
        #[arg(long)]
        perm: String,
        /// 1-based `a,b,c,d` overriding the default tuple.
        #[arg(long, value_delimiter = ',')]
        tuple: Option<Vec<usize>>,
        /// Check every vertex order.
        #[arg(long)]
        verify: bool,
    },
    /// Build the disjoint triangle system of a palette.
    Triangles {
        #[arg(long)]
        palette: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Reduced3Command {
    /// Assemble the reduced 3-graph of a palette on `t` indices.
    FromPalette {
        #[arg(long)]
        palette: PathBuf,
        #[arg(long)]
        t: usize,
    },
    /// Sample a random reduced 3-graph.
    Random {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        p: f64,
    },
    /// Search for a reduced map from a 3-graph.
    Map {
        #[arg(long)]
        graph: PathBuf,
        /// Reduced 3-graph as JSON.
        #[arg(long)]
        reduced: PathBuf,
    },
    /// Read the palette of a slice.
    Slice {
        #[arg(long)]
        reduced: PathBuf,
        /// Slice as JSON.
        #[arg(long)]
        slice: PathBuf,
    },
}
