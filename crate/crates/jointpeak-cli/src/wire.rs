//! Serializable output records. Field names are the documented schema.

use serde::{Deserialize, Serialize};

use jointpeak::JointModel;

/// One line of the `segment` command's JSON output.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TileRecord<'a> {
    pub chrom: &'a str,
    pub tile_start: u64,
    pub tile_end: u64,
    pub bases: usize,
    /// Indexed by peak count; `null` where no feasible model exists.
    pub models: Vec<Option<ModelRecord>>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelRecord {
    pub peaks: usize,
    pub total_loss: f64,
    /// Genomic peak coordinates, absent for the flat model.
    pub peak: Option<PeakRecord>,
    pub peaked_samples: Vec<String>,
    pub fits: Vec<FitRecord>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PeakRecord {
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FitRecord {
    pub sample_id: String,
    pub has_peak: bool,
    pub mean_left: f64,
    pub mean_peak: f64,
    pub mean_right: f64,
    pub loss: f64,
}

impl ModelRecord {
    pub fn from_model(model: &JointModel, window_start: u64, sample_ids: &[String]) -> Self {
        ModelRecord {
            peaks: model.peaks,
            total_loss: model.total_loss,
            peak: model.peak.map(|p| PeakRecord {
                start: window_start + p.first_change as u64,
                end: window_start + p.last_change as u64,
            }),
            peaked_samples: model
                .fits
                .iter()
                .enumerate()
                .filter(|(_, fit)| fit.has_peak)
                .map(|(s, _)| sample_ids[s].clone())
                .collect(),
            fits: model
                .fits
                .iter()
                .enumerate()
                .map(|(s, fit)| FitRecord {
                    sample_id: sample_ids[s].clone(),
                    has_peak: fit.has_peak,
                    mean_left: fit.mean_left,
                    mean_peak: fit.mean_peak,
                    mean_right: fit.mean_right,
                    loss: fit.loss,
                })
                .collect(),
        }
    }
}

/// Trained weights as written by `learn` and read by `predict`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WeightsFile {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub gamma: f64,
    pub training_meta: TrainingMeta,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainingMeta {
    pub iterations: usize,
    /// Final subdifferential residual.
    pub residual: f64,
    pub converged: bool,
    pub objective: f64,
    pub labeled_tiles: usize,
    pub training_tiles: usize,
    pub held_out_tiles: usize,
    /// Label errors on the selection split, one entry per grid value.
    pub gamma_errors: Vec<GammaError>,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaError {
    pub gamma: f64,
    pub errors: u32,
}
