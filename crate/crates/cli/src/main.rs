mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sketchgraph::cpt::Strategy;

/// Exit status for malformed invocations that clap cannot catch.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 1;

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "sketchgraph", version, about = "Batch tools for constrained CAD sketch corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every sketch; violations go to standard error as JSON lines.
    Validate { input: PathBuf },
    /// Sketch JSONL to token-sequence JSONL.
    Tokenize(Transform),
    /// Token-sequence JSONL back to sketch JSONL.
    Detokenize(Transform),
    /// One image per input line, named `<line>.pgm` or `<line>.png`.
    Render(RenderArgs),
    /// Write augmented sketches and a manifest beside the output.
    Augment(AugmentArgs),
    /// Per-line metrics for aligned prediction and ground-truth files, then the means.
    Eval(EvalArgs),
    /// Remaining degrees of freedom of each sketch.
    Dof { input: PathBuf },
    /// Re-solve each sketch from its current parameters.
    Solve(SolveArgs),
    /// Set-prediction loss of prediction bundles against ground-truth sketches.
    Loss(LossArgs),
}

#[derive(Args)]
struct Transform {
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ImageFormat {
    Pgm,
    Png,
}

#[derive(Args)]
pub struct RenderArgs {
    input: PathBuf,
    out_dir: PathBuf,
    #[arg(long)]
    handdrawn: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Image side in pixels.
    #[arg(long, default_value_t = sketchgraph::raster::DEFAULT_SIZE)]
    size: usize,
    #[arg(long, value_enum, default_value_t = ImageFormat::Pgm)]
    format: ImageFormat,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Cpt,
    Rotate,
    Synthetic,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Cpt => Strategy::Cpt,
            StrategyArg::Rotate => Strategy::Rotate,
            StrategyArg::Synthetic => Strategy::Synthetic,
        }
    }
}

#[derive(Args)]
pub struct AugmentArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = StrategyArg::Cpt)]
    strategy: StrategyArg,
    /// Augmentations attempted per input sketch.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; output is identical for every value.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Perturbation rounds per transformation.
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    /// Drag box width as a fraction of the primitive's extent.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 10)]
    max_attempts: usize,
    /// Smallest parameter change that counts as a new sketch.
    #[arg(long, default_value_t = 1e-3)]
    min_delta: f64,
    /// Reject results that leave the canvas instead of rescaling them.
    #[arg(long)]
    no_renormalize: bool,
}

#[derive(Args)]
pub struct EvalArgs {
    pred: PathBuf,
    gt: PathBuf,
    /// Report the constraint F1 that ignores subreferences.
    #[arg(long)]
    no_subrefs: bool,
    /// Count pad tokens of empty rows in token accuracy.
    #[arg(long)]
    include_padding: bool,
    /// Parameter tolerance in bins for a primitive true positive.
    #[arg(long, default_value_t = 5)]
    pf1_bins: u8,
    /// Require parameter errors strictly below the tolerance.
    #[arg(long)]
    pf1_exclusive: bool,
}

#[derive(Args)]
pub struct SolveArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write one solver report per line as JSONL.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
pub struct LossArgs {
    /// Prediction bundles, one JSON object per line, aligned with `gt`.
    bundles: PathBuf,
    gt: PathBuf,
    /// Score rows in order instead of under the optimal matching.
    #[arg(long)]
    identity: bool,
    #[arg(long)]
    include_padding: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { input } => commands::validate(&input),
        Command::Tokenize(t) => commands::tokenize(&t.input, t.output.as_deref()),
        Command::Detokenize(t) => commands::detokenize(&t.input, t.output.as_deref()),
        Command::Render(a) => commands::render(&a),
        Command::Augment(a) => commands::augment(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Dof { input } => commands::dof(&input),
        Command::Solve(a) => commands::solve(&a),
        Command::Loss(a) => commands::loss(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_DATA),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("sketchgraph: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("sketchgraph: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
