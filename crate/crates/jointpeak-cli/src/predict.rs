//! `predict`: map learned weights to a penalty per tile, select the model
//! size, and emit the called peaks as BED.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

use jointpeak::{
    extract_features_with, predict_log_penalty, selection_breakpoints, validate_joint_model,
    Feature,
};

use crate::data::{fit_tiles, GenomeWindow, LoadedSamples};
use crate::output_writer;
use crate::wire::WeightsFile;

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Tab-separated samples manifest: sampleId, path, cellType.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Weights JSON produced by `learn`.
    #[arg(long)]
    pub weights: PathBuf,
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
    /// Output path for BED lines (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_predict(args: &PredictArgs) -> Result<()> {
    let window: GenomeWindow = args.window.parse()?;
    let weights: WeightsFile = serde_json::from_reader(BufReader::new(
        File::open(&args.weights)
            .with_context(|| format!("opening weights {}", args.weights.display()))?,
    ))
    .with_context(|| format!("parsing weights {}", args.weights.display()))?;
    if weights.weights.len() != weights.feature_names.len() {
        bail!(
            "weights file lists {} names for {} weights",
            weights.feature_names.len(),
            weights.weights.len()
        );
    }
    let feature_set: Vec<Feature> = weights
        .feature_names
        .iter()
        .map(|name| Feature::from_name(name).map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;

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
        let selection = selection_breakpoints(&tile.sequence.losses())?;
        let features = extract_features_with(&tile.problem, &feature_set);
        let log_penalty = predict_log_penalty(&weights.weights, &features)?;
        let chosen = selection.select(log_penalty.exp());
        if chosen == 0 {
            continue;
        }
        let model = tile.sequence.models[chosen]
            .as_ref()
            .expect("selection only offers fitted models");
        validate_joint_model(model, &tile.problem).map_err(|e| {
            anyhow!(
                "tile {}: emitted model violates constraints: {e}",
                tile.tile.start
            )
        })?;
        let peak = model.peak.expect("peaked model has an interval");
        let ids: Vec<&str> = model
            .fits
            .iter()
            .enumerate()
            .filter(|(_, fit)| fit.has_peak)
            .map(|(s, _)| tile.problem.sample_ids()[s].as_str())
            .collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            window.chrom,
            tile.tile.start + peak.first_change as u64,
            tile.tile.start + peak.last_change as u64,
            ids.join(",")
        )?;
    }
    out.flush()?;
    Ok(())
}
