//! `segment`: fit the joint model sequence on every tile of a window and
//! emit one JSON record per tile.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use crate::data::{fit_tiles, GenomeWindow, LoadedSamples};
use crate::output_writer;
use crate::wire::{ModelRecord, TileRecord};

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Tab-separated samples manifest: sampleId, path, cellType.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Genomic window chrom:start-end (0-based half-open).
    #[arg(long)]
    pub window: String,
    /// Problem size in bases per tile.
    #[arg(long = "problem-size", default_value_t = 100_000)]
    pub problem_size: usize,
    /// Zoom factor between bin sizes.
    #[arg(long = "zoom-factor", default_value_t = 2)]
    pub zoom_factor: usize,
    /// Fraction of overlap between consecutive tiles, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub overlap: f64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_segment(args: &SegmentArgs) -> Result<()> {
    let window: GenomeWindow = args.window.parse()?;
    let samples = LoadedSamples::load(&args.manifest)?;
    let profiles = samples.profiles(&window.chrom);
    let fitted = fit_tiles(
        &profiles,
        &window,
        args.problem_size,
        args.overlap,
        args.zoom_factor,
    )?;
    let mut out = output_writer(args.out.as_deref())?;
    for tile in &fitted {
        let record = TileRecord {
            chrom: &window.chrom,
            tile_start: tile.tile.start,
            tile_end: tile.tile.end,
            bases: tile.problem.bases(),
            models: tile
                .sequence
                .models
                .iter()
                .map(|model| {
                    model.as_ref().map(|m| {
                        ModelRecord::from_model(m, tile.tile.start, tile.problem.sample_ids())
                    })
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
