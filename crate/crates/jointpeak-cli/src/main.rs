use anyhow::Result;
use clap::{Parser, Subcommand};

use jointpeak_cli::{
    run_bench, run_evaluate, run_learn, run_predict, run_segment, BenchArgs, EvaluateArgs,
    LearnArgs, PredictArgs, SegmentArgs,
};

#[derive(Parser)]
#[command(
    name = "jointpeak",
    version,
    about = "Joint peak detection across samples with supervised model-size selection"
)]
struct Cli {
    /// Worker threads for tile processing (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the joint model sequence on every tile and emit JSON records.
    Segment(SegmentArgs),
    /// Train penalty-function weights from labeled regions.
    Learn(LearnArgs),
    /// Call peaks with trained weights and emit BED lines.
    Predict(PredictArgs),
    /// Score BED predictions against labels and emit an error CSV.
    Evaluate(EvaluateArgs),
    /// Time the solver and the exact DP on simulated data, emitting CSV.
    Bench(BenchArgs),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    match &cli.command {
        Command::Segment(args) => run_segment(args),
        Command::Learn(args) => run_learn(args),
        Command::Predict(args) => run_predict(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Bench(args) => run_bench(args),
    }
}
