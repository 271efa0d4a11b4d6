//! `bench`: time the zoom solver against the exact three-segment DP on
//! simulated single-peak data.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::Args;
use rand::rngs::StdRng;
use rand::SeedableRng;

use jointpeak::{fit_model_sequence, sim, three_segment_dp};

use crate::output_writer;

/// The quadratic baseline only runs up to this problem size.
pub const DP_SIZE_CAP: usize = 10_000;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated problem sizes in bases.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1000,10000,100000,1000000"
    )]
    pub sizes: Vec<usize>,
    /// Zoom factor between bin sizes.
    #[arg(long = "zoom-factor", default_value_t = 2)]
    pub zoom_factor: usize,
    /// Repetitions per size; the best time is reported.
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    /// Seed for the simulated data.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output path for the timing CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub bases: usize,
    pub seconds: f64,
    pub algorithm: &'static str,
}

/// Generate one problem per size and time both solvers, best of
/// `repetitions` runs on a monotonic clock.
pub fn measure(
    sizes: &[usize],
    beta: usize,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if sizes.is_empty() {
        bail!("no benchmark sizes given");
    }
    if let Some(&small) = sizes.iter().find(|&&b| b < 10) {
        bail!("benchmark size {small} is below the minimum of 10");
    }
    if repetitions < 1 {
        bail!("need at least one repetition");
    }
    let mut rows = Vec::new();
    for &bases in sizes {
        let mut rng = StdRng::seed_from_u64(seed ^ bases as u64);
        let problem = sim::bench_problem(&mut rng, bases);
        let mut best = f64::INFINITY;
        for _ in 0..repetitions {
            let clock = Instant::now();
            let sequence = fit_model_sequence(&problem, beta)?;
            let elapsed = clock.elapsed().as_secs_f64();
            debug_assert!(sequence.models[0].is_some());
            best = best.min(elapsed);
        }
        rows.push(BenchRow {
            bases,
            seconds: best,
            algorithm: "jointzoom",
        });
        if bases <= DP_SIZE_CAP {
            let mut best = f64::INFINITY;
            for _ in 0..repetitions {
                let clock = Instant::now();
                let split = three_segment_dp(problem.counts(0));
                let elapsed = clock.elapsed().as_secs_f64();
                debug_assert!(split.is_some());
                best = best.min(elapsed);
            }
            rows.push(BenchRow {
                bases,
                seconds: best,
                algorithm: "dp3",
            });
        }
    }
    Ok(rows)
}

pub fn run_bench(args: &BenchArgs) -> Result<()> {
    let rows = measure(&args.sizes, args.zoom_factor, args.repetitions, args.seed)?;
    let mut out = output_writer(args.out.as_deref())?;
    writeln!(out, "B,seconds,algorithm")?;
    for row in &rows {
        writeln!(out, "{},{},{}", row.bases, row.seconds, row.algorithm)?;
    }
    out.flush()?;
    Ok(())
}
