//! `learn`: turn labeled tiles into target intervals and train the penalty
//! weights, selecting the regularization strength on held-out tiles.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use jointpeak::{
    compute_target_interval, errors_by_model_size, extract_features_with, parse_labels,
    predict_log_penalty, selection_breakpoints, train_fista, Feature, FeatureMatrix, FistaConfig,
    LabeledRegion, SelectionFunction, TargetInterval, DEFAULT_FEATURES,
};

use crate::data::{fit_tiles, FittedTile, GenomeWindow, LoadedSamples};
use crate::output_writer;
use crate::wire::{GammaError, TrainingMeta, WeightsFile};

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Tab-separated samples manifest: sampleId, path, cellType.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Tab-separated labels file: chrom, start, end, annotation, sampleId.
    #[arg(long)]
    pub labels: PathBuf,
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
    /// Comma-separated regularization grid; default powers of two from 2^-10
    /// to 2^2.
    #[arg(long = "gamma-grid", value_delimiter = ',')]
    pub gamma_grid: Option<Vec<f64>>,
    /// Comma-separated feature names
    /// (intercept,logTotal,logMax,logBases,logQuartile).
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Seed for the train/held-out tile split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path for the weights JSON (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn default_gamma_grid() -> Vec<f64> {
    (-5..=1).map(|k| 2f64.powi(2 * k)).collect()
}

pub fn parse_feature_names(names: &Option<Vec<String>>) -> Result<Vec<Feature>> {
    match names {
        None => Ok(DEFAULT_FEATURES.to_vec()),
        Some(names) => names
            .iter()
            .map(|name| Feature::from_name(name).map_err(Into::into))
            .collect(),
    }
}

/// One labeled tile ready for training.
struct LearnTile {
    features: FeatureMatrix,
    target: TargetInterval,
    selection: SelectionFunction,
    errors: Vec<Option<u32>>,
}

fn learn_tiles(
    fitted: &[FittedTile],
    regions: &[LabeledRegion],
    features: &[Feature],
) -> Result<Vec<LearnTile>> {
    let mut tiles = Vec::new();
    for tile in fitted {
        let tile_regions: Vec<LabeledRegion> = regions
            .iter()
            .filter(|r| r.start >= tile.tile.start && r.end <= tile.tile.end)
            .cloned()
            .collect();
        if tile_regions.is_empty() {
            continue;
        }
        let errors = errors_by_model_size(
            &tile.sequence,
            tile.tile.start,
            tile.problem.sample_ids(),
            &tile_regions,
        )?;
        let totals: Vec<Option<u32>> = errors
            .iter()
            .map(|e| e.as_ref().map(|c| c.total()))
            .collect();
        let selection = selection_breakpoints(&tile.sequence.losses())?;
        let target = compute_target_interval(&selection, &totals)?;
        tiles.push(LearnTile {
            features: extract_features_with(&tile.problem, features),
            target,
            selection,
            errors: totals,
        });
    }
    Ok(tiles)
}

fn split_error(tiles: &[LearnTile], indices: &[usize], weights: &[f64]) -> Result<u32> {
    let mut total = 0;
    for &i in indices {
        let tile = &tiles[i];
        let prediction = predict_log_penalty(weights, &tile.features)?;
        let chosen = tile.selection.select(prediction.exp());
        total += tile.errors[chosen].expect("selection only offers fitted models");
    }
    Ok(total)
}

fn train_subset(tiles: &[LearnTile], indices: &[usize], gamma: f64) -> Result<Vec<f64>> {
    let features: Vec<FeatureMatrix> = indices.iter().map(|&i| tiles[i].features.clone()).collect();
    let intervals: Vec<TargetInterval> = indices.iter().map(|&i| tiles[i].target).collect();
    let trained = train_fista(&features, &intervals, &FistaConfig::with_gamma(gamma))?;
    Ok(trained.weights)
}

pub fn run_learn(args: &LearnArgs) -> Result<()> {
    let window: GenomeWindow = args.window.parse()?;
    let feature_set = parse_feature_names(&args.features)?;
    let samples = LoadedSamples::load(&args.manifest)?;
    let labels_reader = BufReader::new(
        File::open(&args.labels)
            .with_context(|| format!("opening labels {}", args.labels.display()))?,
    );
    let regions: Vec<LabeledRegion> = parse_labels(labels_reader)?
        .into_iter()
        .filter(|r| r.chrom == window.chrom && r.start >= window.start && r.end <= window.end)
        .collect();
    if regions.is_empty() {
        bail!("no labels fall inside window {}", args.window);
    }
    for region in &regions {
        if !samples
            .entries
            .iter()
            .any(|e| e.sample_id == region.sample_id)
        {
            bail!("labeled sample {} is not in the manifest", region.sample_id);
        }
    }

    let profiles = samples.profiles(&window.chrom);
    let fitted = fit_tiles(
        &profiles,
        &window,
        args.problem_size,
        args.overlap,
        args.zoom_factor,
    )?;
    let tiles = learn_tiles(&fitted, &regions, &feature_set)?;
    if tiles.is_empty() {
        bail!("no tile fully contains a labeled region; widen the tiles or move the window");
    }

    let mut grid = args.gamma_grid.clone().unwrap_or_else(default_gamma_grid);
    if grid.is_empty() || grid.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        bail!("gamma grid must be non-empty, finite, non-negative");
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Split labeled tiles in half for gamma selection; with a single tile the
    // training error stands in for held-out error.
    let mut order: Vec<usize> = (0..tiles.len()).collect();
    order.shuffle(&mut StdRng::seed_from_u64(args.seed));
    let (train_idx, eval_idx): (Vec<usize>, Vec<usize>) = if tiles.len() >= 2 {
        let cut = tiles.len().div_ceil(2);
        (order[..cut].to_vec(), order[cut..].to_vec())
    } else {
        (order.clone(), order.clone())
    };

    let mut gamma_errors = Vec::with_capacity(grid.len());
    let mut best: Option<(u32, f64)> = None;
    for &gamma in &grid {
        let weights = train_subset(&tiles, &train_idx, gamma)
            .with_context(|| format!("training with gamma {gamma}"))?;
        let errors = split_error(&tiles, &eval_idx, &weights)?;
        gamma_errors.push(GammaError { gamma, errors });
        if best.is_none_or(|(e, _)| errors < e) {
            best = Some((errors, gamma));
        }
    }
    let (_, chosen_gamma) = best.expect("non-empty gamma grid");

    // Final fit on every labeled tile with the selected regularization.
    let all: Vec<usize> = (0..tiles.len()).collect();
    let features: Vec<FeatureMatrix> = all.iter().map(|&i| tiles[i].features.clone()).collect();
    let intervals: Vec<TargetInterval> = all.iter().map(|&i| tiles[i].target).collect();
    let trained = train_fista(
        &features,
        &intervals,
        &FistaConfig::with_gamma(chosen_gamma),
    )?;

    let weights_file = WeightsFile {
        feature_names: feature_set.iter().map(|f| f.name().to_string()).collect(),
        weights: trained.weights,
        gamma: chosen_gamma,
        training_meta: TrainingMeta {
            iterations: trained.iterations,
            residual: trained.residual,
            converged: trained.converged,
            objective: trained.objective,
            labeled_tiles: tiles.len(),
            training_tiles: train_idx.len(),
            held_out_tiles: if tiles.len() >= 2 { eval_idx.len() } else { 0 },
            gamma_errors,
            seed: args.seed,
        },
    };
    let mut out = output_writer(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &weights_file)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
