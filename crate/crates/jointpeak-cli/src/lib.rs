//! Command implementations behind the `jointpeak` binary.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

pub mod bench;
pub mod data;
pub mod evaluate;
pub mod learn;
pub mod predict;
pub mod segment;
pub mod wire;

pub use bench::{measure, run_bench, BenchArgs};
pub use evaluate::{run_evaluate, EvaluateArgs};
pub use learn::{run_learn, LearnArgs};
pub use predict::{run_predict, PredictArgs};
pub use segment::{run_segment, SegmentArgs};

/// Buffered writer on the given path, or stdout when none.
pub fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}
