use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "stator", version, about = "Entanglement-cost optimizer, protocol simulator and Hamiltonian compiler")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Figure data: optimized vs dyadic cost, small-angle bound, communication curves.
    Curves(CurvesArgs),
    /// Optimal stage schedule for one angle.
    Optimize(OptimizeArgs),
    /// Monte Carlo or exhaustive simulation of the stage protocol.
    Simulate(SimulateArgs),
    /// Compile a tensor-product Hamiltonian from a JSON file.
    Compile(CompileArgs),
    /// Protocol for a general decomposition Σ λ_k V_k⊗…⊗V_k.
    General(GeneralArgs),
    /// Run the built-in invariant checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// Production optimizer tables (about half a minute to build).
    Full,
    /// Coarse tables for quick looks and tests.
    Fast,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Typical-set slack.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Fidelity slack.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Maximum number of stages L.
    #[arg(long, default_value_t = 25)]
    pub stages: usize,
    #[arg(long, value_enum, default_value_t = Resolution::Full)]
    pub resolution: Resolution,
    /// Output file (directory for `curves`); stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurvesArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub alpha_max: f64,
    /// Log-spaced angles between the bounds.
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    /// Grid points for the bound over [π/2^20, π/2^19).
    #[arg(long, default_value_t = 512)]
    pub bound_points: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Optimized,
    Cdkl,
    Deterministic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
    #[arg(long, default_value_t = 3)]
    pub parties: usize,
    #[arg(long, value_enum, default_value_t = ScheduleKind::Optimized)]
    pub schedule: ScheduleKind,
    /// Enumerate every branch instead of sampling.
    #[arg(long)]
    pub exhaustive: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompileArgs {
    /// Hamiltonian JSON file.
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GeneralArgs {
    /// Canonical two-qubit angles θx,θy,θz.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "zstrings")]
    pub theta: Option<Vec<f64>>,
    /// Commuting Z-string generators, e.g. "0-1:0.3;1-2:-0.2".
    #[arg(long, allow_hyphen_values = true)]
    pub zstrings: Option<String>,
    /// Party count for --zstrings.
    #[arg(long, default_value_t = 3)]
    pub parties: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
}
