//! `amt`: generate, code, sample, compare, check and render algebraic
//! measure trees.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "amt", version, about = "Finite algebraic measure trees")]
struct Cli {
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random or deterministic measure tree.
    Gen(GenArgs),
    /// Code a triangulation into a measure tree.
    Code(CodeArgs),
    /// Decode a measure tree into a triangulation of the circle.
    Decode(DecodeArgs),
    /// Estimate or enumerate a sample statistic of a tree.
    Sample(SampleArgs),
    /// Distance between two trees, triangulations or saved distributions.
    Compare(CompareArgs),
    /// Run the axiom, oracle, coding, VC and Glivenko-Cantelli suites.
    Check(CheckArgs),
    /// Draw a triangulation as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Beta,
    Comb,
    Symmetric,
    Triangulation,
    Random,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    /// Split parameter: a number in [-2, inf) or "inf".
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub beta: String,
    /// Number of leaves (vertices for `random`).
    #[arg(long)]
    pub n: Option<usize>,
    /// Depth of the symmetric tree.
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CodeArgs {
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Decode the result again and require an equivalent triangulation.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    pub input: PathBuf,
    /// Vertex placed at angle zero; defaults to the first leaf.
    #[arg(long)]
    pub rho: Option<usize>,
    /// Random planar order from this seed instead of the canonical one.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Code the result again and require an equivalent tree.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Stat {
    Shape,
    Mass,
    Distance,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub stat: Stat,
    #[arg(long, short)]
    pub m: usize,
    /// Enumerate exactly instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// Sample size N.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Independent estimates of the distance polynomial.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Total variation between shape laws.
    Tv,
    /// Sup-norm Wasserstein distance between mass-tensor laws.
    Wasserstein,
    /// Difference of mean off-diagonal distance polynomials.
    Polynomial,
    /// Hausdorff distance between triangulations.
    Hausdorff,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, value_enum, default_value = "tv")]
    pub metric: Metric,
    #[arg(long, short, default_value_t = 4)]
    pub m: usize,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid tolerance for the Hausdorff distance.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Axioms,
    Oracle,
    Coding,
    Vc,
    Gc,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Check this tree instead of random ones.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Largest random tree.
    #[arg(long, default_value_t = 12)]
    pub max_n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    /// A triangulation, or a tree which is decoded first.
    pub input: PathBuf,
    /// Overlay the dual tree.
    #[arg(long)]
    pub dual: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Code(a) => commands::code(&a),
        Command::Decode(a) => commands::decode(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Check(a) => commands::check(&a),
        Command::Render(a) => commands::render(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("amt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
