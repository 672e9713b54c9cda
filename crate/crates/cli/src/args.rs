use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "projqaoa", version, about = "Projector-Hamiltonian QAOA experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cross-validate simulators, closed forms, symmetries and optimizers.
    Verify(VerifyArgs),
    /// Exact and asymptotic single-layer optimal angles.
    OptimalAngles(AnglesArgs),
    /// Global optimization per (n, p) with last-layer line defects.
    LastLayer(LastLayerArgs),
    /// Layerwise training and saturation depth statistics.
    Saturation(SaturationArgs),
    /// Optimal schedules across qubit counts.
    Concentration(ConcentrationArgs),
    /// A single training run.
    Train(TrainArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Leave the wall_time column empty so repeated runs are byte-identical.
    #[arg(long)]
    pub no_wall_time: bool,
}

/// Either `--n N` or `--n-range A:B` (inclusive).
#[derive(Debug, Clone, Args)]
pub struct QubitArgs {
    #[arg(long, conflicts_with = "n_range")]
    pub n: Option<usize>,
    #[arg(long, value_name = "A:B")]
    pub n_range: Option<String>,
}

impl QubitArgs {
    pub fn resolve(&self, default: RangeInclusive<usize>) -> Result<RangeInclusive<usize>, CliError> {
        let range = match (self.n, &self.n_range) {
            (Some(n), _) => n..=n,
            (None, Some(text)) => parse_range(text)?,
            (None, None) => default,
        };
        if range.is_empty() || *range.start() == 0 {
            return Err(CliError::Config(format!(
                "qubit range {}:{} must be nonempty and start at 1 or more",
                range.start(),
                range.end()
            )));
        }
        Ok(range)
    }
}

pub fn parse_range(text: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::Config(format!("expected A:B, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    Ok(a..=b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Global,
    Layerwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    None,
    Phase,
    Undertrain,
}

#[derive(Debug, Clone, Args)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Largest qubit count for the random-probe checks.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points per axis of the single-layer certification grid.
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    /// Skip the optimizer checks.
    #[arg(long)]
    pub skip_training: bool,
    /// Harness self-test: perturb the closed-form overlap so verification must fail.
    #[arg(long, hide = true)]
    pub corrupt: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnglesArgs {
    #[command(flatten)]
    pub qubits: QubitArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LastLayerArgs {
    #[command(flatten)]
    pub qubits: QubitArgs,
    /// Deepest circuit; every depth from 1 is optimized.
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SaturationArgs {
    #[command(flatten)]
    pub qubits: QubitArgs,
    /// Defaults to 2n + 2.
    #[arg(long)]
    pub p_max: Option<usize>,
    #[arg(long, value_enum, default_value_t = NoiseArg::None)]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Per-layer iteration budget for `--noise undertrain`.
    #[arg(long, default_value_t = 5)]
    pub undertrain_iterations: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    /// Number of seeds, starting at `--seed`.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Exit 1 unless the noiseless modal p* equals n (or, with noise, p* differs
    /// from n in the majority of seeds).
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConcentrationArgs {
    #[command(flatten)]
    pub qubits: QubitArgs,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub n: usize,
    /// Depth for the global strategy, p_max for layerwise.
    #[arg(long, visible_alias = "p-max")]
    pub p: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Global)]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = NoiseArg::None)]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    #[arg(long, default_value_t = 5)]
    pub undertrain_iterations: usize,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
