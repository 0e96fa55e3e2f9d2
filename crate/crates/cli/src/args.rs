//! Argument surface of the `lqgame` binary and the JSON experiment-config
//! schema. Explicit flags override config-file values; unknown config fields
//! are rejected.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "lqgame",
    version,
    about = "Open-loop Nash equilibria on random directed chains and trees"
)]
pub struct Cli {
    /// JSON experiment config supplying defaults (flags win).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output CSV path; a JSON sidecar is written next to it as <out>.json.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Master seed for simulation commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suppress CSV echo on stdout (file outputs still written).
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stationary equilibrium coefficients (CSV: k,phi).
    Coeffs(CoeffsArgs),
    /// Backward Riccati solve (CSV: t,k,phi).
    Riccati(RiccatiArgs),
    /// Transition-kernel entries (CSV: gap,value).
    Kernel(KernelArgs),
    /// Euler-Maruyama simulation of the equilibrium dynamics.
    Simulate(SimulateArgs),
    /// Variance quadrature, asymptotic limit, optional Monte Carlo pairing.
    Variance(VarianceArgs),
    /// Oracle verification suites (exit 1 on any failed check).
    Verify(VerifyArgs),
    /// Tree diagnostics: depth-invariance and deterministic-limit checks.
    Tree(TreeArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Chain,
    Twosided,
    Tree,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Periodic,
    ZeroTail,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    /// T -> infinity constant coefficients.
    Stationary,
    /// Finite-horizon backward solve.
    Riccati,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteArg {
    Convolution,
    Kernel,
    GeneratingFunction,
    TreeDepth,
    Rho,
    Variance,
    All,
}

#[derive(clap::Args, Debug, Default)]
pub struct CoeffsArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub q1: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Truncation K (indices 0..K, or -K..K two-sided).
    #[arg(long, value_name = "K")]
    pub trunc: Option<usize>,
}

#[derive(clap::Args, Debug, Default)]
pub struct RiccatiArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub q1: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Horizon T.
    #[arg(long, value_name = "T")]
    pub horizon: Option<f64>,
    #[arg(long, value_name = "K")]
    pub trunc: Option<usize>,
    /// Tree depth D (tree model).
    #[arg(long)]
    pub depth: Option<usize>,
    /// Branching factor M (tree model).
    #[arg(long, value_name = "M")]
    pub branching: Option<u32>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(clap::Args, Debug, Default)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Largest index gap reported.
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(clap::Args, Debug, Default)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub q1: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Simulated duration T.
    #[arg(long, value_name = "T")]
    pub horizon: Option<f64>,
    /// Player count N (chain/two-sided).
    #[arg(long, value_name = "N")]
    pub players: Option<usize>,
    /// Generations G (tree).
    #[arg(long, value_name = "G")]
    pub generations: Option<usize>,
    #[arg(long, value_name = "M")]
    pub branching: Option<u32>,
    /// Strategy depth D (tree).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Coefficient truncation for the strategy (defaults to N-1 zero-tail,
    /// N/2 periodic).
    #[arg(long, value_name = "K")]
    pub trunc: Option<usize>,
    #[arg(long)]
    pub track_player: Option<usize>,
    /// Print the tracked player's sample-variance summary.
    #[arg(long)]
    pub track_var: bool,
    /// Store full trajectories in the CSV (budget-guarded); default stores
    /// per-path terminal states of the tracked player.
    #[arg(long)]
    pub store: bool,
}

#[derive(clap::Args, Debug, Default)]
pub struct VarianceArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Initial quadrature panel count.
    #[arg(long)]
    pub panels: Option<usize>,
    /// Pair the quadrature with a Monte Carlo run.
    #[arg(long)]
    pub mc: bool,
    #[arg(long, value_name = "N")]
    pub players: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(clap::Args, Debug, Default)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<SuiteArg>,
    #[arg(long, value_name = "K")]
    pub trunc: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Dense oracle dimension / comparison window.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_name = "M")]
    pub branching: Option<u32>,
    #[arg(long, value_name = "G")]
    pub generations: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(clap::Args, Debug, Default)]
pub struct TreeArgs {
    #[arg(long, value_name = "M")]
    pub branching: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_name = "G")]
    pub generations: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Horizon T.
    #[arg(long, value_name = "T")]
    pub horizon: Option<f64>,
}

/// JSON experiment config mirroring the flag surface. Unknown fields are
/// rejected so typos fail loudly.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: Option<ModelArg>,
    pub p: Option<f64>,
    pub p1: Option<f64>,
    pub q1: Option<f64>,
    pub eps: Option<f64>,
    pub c: Option<f64>,
    pub sigma: Option<f64>,
    pub horizon: Option<f64>,
    pub trunc: Option<usize>,
    pub steps: Option<usize>,
    pub branching: Option<u32>,
    pub generations: Option<usize>,
    pub depth: Option<usize>,
    pub players: Option<usize>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub boundary: Option<BoundaryArg>,
    pub strategy: Option<StrategyArg>,
    pub track_player: Option<usize>,
    pub t: Option<f64>,
    pub window: Option<usize>,
    pub panels: Option<usize>,
    pub dim: Option<usize>,
    pub suite: Option<SuiteArg>,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> crate::CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| crate::CliError::Validation(format!("config: {e}")))
    }
}
