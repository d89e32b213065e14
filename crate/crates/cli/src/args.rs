use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::sweep::{Sweep, Window};
use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "quench", version, about = "Mass and coupling quenches of a scalar field")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Momentum grid node count.
    #[arg(long, global = true)]
    pub grid_nodes: Option<usize>,

    /// UV momentum cutoff (required in three dimensions).
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,

    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// TOML file with default parameter values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free quench, slab, thermal and vertex propagators.
    Propagator(PropagatorArgs),
    /// Average effective inverse temperature.
    Beta(BetaArgs),
    /// Stationary effective mass from the gap equation.
    Mstar(MstarArgs),
    /// Self-consistent time evolution of the effective mass.
    Evolve(EvolveArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct PhysArgs {
    /// Spatial dimension (1, 2 or 3).
    #[arg(long)]
    pub d: Option<u32>,

    /// Pre-quench mass.
    #[arg(long)]
    pub m0: Option<f64>,

    /// Post-quench mass.
    #[arg(long)]
    pub m: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(
    ArgGroup::new("kind").required(true).args(["mode", "deep", "real_space", "slab", "thermal", "vertex"])
))]
pub struct PropagatorArgs {
    /// Two-time propagator of a single momentum mode.
    #[arg(long)]
    pub mode: bool,
    /// Deep-quench real-space profile (massless post-quench theory).
    #[arg(long)]
    pub deep: bool,
    /// Equal-time real-space propagator.
    #[arg(long)]
    pub real_space: bool,
    /// Slab propagator at the matched thickness.
    #[arg(long)]
    pub slab: bool,
    /// Thermal propagator at inverse temperature --beta.
    #[arg(long)]
    pub thermal: bool,
    /// Vertex-operator correlator after a deep quench in one dimension.
    #[arg(long)]
    pub vertex: bool,

    #[command(flatten)]
    pub phys: PhysArgs,

    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    /// Equal-time sweep `t1 = t2 = t`.
    #[arg(long)]
    pub t_sweep: Option<Sweep>,
    /// Time of a real-space profile.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 6.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 61)]
    pub r_points: usize,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Vertex charge.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    #[command(flatten)]
    pub phys: PhysArgs,

    /// Sweep over m/m0.
    #[arg(long, conflicts_with = "m")]
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Args)]
pub struct MstarArgs {
    #[command(flatten)]
    pub phys: PhysArgs,

    #[arg(long)]
    pub lambda: Option<f64>,

    #[arg(long, conflicts_with = "lambda")]
    pub lambda_sweep: Option<Sweep>,

    /// Use the renormalized-coupling gap equation (three dimensions).
    #[arg(long)]
    pub renormalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Coupling {
    Stage,
    Lagged,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub phys: PhysArgs,

    #[arg(long)]
    pub lambda: Option<f64>,

    #[arg(long)]
    pub lambda0: Option<f64>,

    #[arg(long)]
    pub t_max: Option<f64>,

    /// Time step (default 0.1 / omega_max).
    #[arg(long)]
    pub dt: Option<f64>,

    #[arg(long, value_enum)]
    pub coupling: Option<Coupling>,

    /// Record every n-th step (default: about every 0.02 time units).
    #[arg(long)]
    pub stride: Option<usize>,

    /// Fit window `start:end` (default: second half of the run).
    #[arg(long)]
    pub window: Option<Window>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Fast,
    Figures,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Fast)]
    pub suite: Suite,
}
