use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "uavsim", version, about = "Generate, simulate and filter two-obstacle UAV test cases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write COUNT generated test cases as JSON.
    Generate(GenerateArgs),
    /// Fly one test case and write its trajectory, plot and report.
    Simulate(SimulateArgs),
    /// Generate and simulate until TARGET predicted violations are found.
    Campaign(CampaignArgs),
    /// Plot a test case and dump the depth view from its start pose.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config; unset keys keep their defaults.
    #[arg(long, env = "UAVSIM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Generator seed; overrides `generator.rng_seed`.
    #[arg(long, env = "UAVSIM_SEED")]
    pub seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, env = "UAVSIM_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Mission JSON (`start`, `waypoints`, `landing`); a straight
    /// south-to-north crossing when omitted.
    #[arg(long, env = "UAVSIM_MISSION")]
    pub mission: Option<PathBuf>,
    #[arg(long, env = "UAVSIM_COUNT", default_value_t = 1)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Test-case JSON.
    pub case: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Also write depth/cloud dumps and the per-step lookahead trees.
    #[arg(long)]
    pub debug: bool,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, env = "UAVSIM_MISSION")]
    pub mission: Option<PathBuf>,
    /// Maximum number of cases to evaluate.
    #[arg(long, env = "UAVSIM_BUDGET")]
    pub budget: Option<usize>,
    /// Number of predicted violations wanted.
    #[arg(long, env = "UAVSIM_TARGET")]
    pub target: Option<usize>,
    /// Evaluation threads; the output does not depend on it.
    #[arg(long, env = "UAVSIM_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Test-case JSON.
    pub case: PathBuf,
    #[command(flatten)]
    pub common: Common,
}
