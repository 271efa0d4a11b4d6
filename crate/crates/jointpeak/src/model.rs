//! Segment means, Poisson loss, and the joint model types.
//!
//! A joint model describes one fit over a problem: an optional peak interval
//! shared by all peaked samples, and for every sample either a flat mean or a
//! left/peak/right triple of means. Feasibility requires strictly alternating
//! changes (up then down), so the per-base peak indicator stays in {0, 1}.

use serde::{Deserialize, Serialize};

use crate::coverage::ProblemMatrix;

/// Poisson loss of one constant-mean segment: `width * mean - total * log(mean)`.
///
/// Follows the `0 * log 0 = 0` convention: an empty segment costs 0, a zero
/// mean with positive total costs infinity.
///
/// Panics if `mean` is negative.
pub fn poisson_loss(mean: f64, total: f64, width: f64) -> f64 {
    assert!(mean >= 0.0, "segment mean must be non-negative, got {mean}");
    if total == 0.0 {
        return width * mean;
    }
    if mean == 0.0 {
        return f64::INFINITY;
    }
    width * mean - total * mean.ln()
}

/// Poisson loss of a segment at its maximum-likelihood mean `total / width`.
///
/// Exact integer totals and widths keep this reproducible across call sites.
pub(crate) fn segment_loss(total: u64, width: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    debug_assert!(width > 0, "positive total {total} in an empty segment");
    let t = total as f64;
    t - t * (t / width as f64).ln()
}

/// Cumulative sum of signs of changes, starting at 0.
///
/// Feasible up/down models keep every entry in {0, 1}: entry 1 marks peak
/// bases, entry 0 background.
pub fn peak_indicator(means: &[f64]) -> Vec<i64> {
    assert!(!means.is_empty(), "peak indicator of an empty mean vector");
    let mut out = Vec::with_capacity(means.len());
    let mut level = 0i64;
    out.push(level);
    for pair in means.windows(2) {
        let diff = pair[1] - pair[0];
        if diff > 0.0 {
            level += 1;
        } else if diff < 0.0 {
            level -= 1;
        }
        out.push(level);
    }
    out
}

/// Number of constant segments and the implied peak count `(segments - 1) / 2`.
///
/// The division truncates; callers that need a valid up/down model check the
/// parity of `segments - 1` themselves.
pub fn segments_and_peaks(means: &[f64]) -> (usize, usize) {
    assert!(!means.is_empty(), "segment count of an empty mean vector");
    let segments = 1 + means.windows(2).filter(|pair| pair[0] != pair[1]).count();
    (segments, (segments - 1) / 2)
}

/// Peak boundaries in base units within a problem.
///
/// The peak covers `[first_change, last_change)`; both background segments are
/// non-empty, so `1 <= first_change < last_change <= bases - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PeakInterval {
    pub first_change: usize,
    pub last_change: usize,
}

impl PeakInterval {
    pub fn width(&self) -> usize {
        self.last_change - self.first_change
    }
}

/// Per-sample fit: either one flat segment or a left/peak/right triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleFit {
    pub has_peak: bool,
    pub mean_left: f64,
    pub mean_peak: f64,
    pub mean_right: f64,
    /// Poisson loss contribution of this sample.
    pub loss: f64,
}

impl SampleFit {
    pub(crate) fn flat(mean: f64, loss: f64) -> Self {
        SampleFit {
            has_peak: false,
            mean_left: mean,
            mean_peak: mean,
            mean_right: mean,
            loss,
        }
    }
}

/// One joint segmentation: `peaks` samples share a single peak interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JointModel {
    /// Number of peaked samples.
    pub peaks: usize,
    /// Shared peak position; absent iff `peaks == 0`.
    pub peak: Option<PeakInterval>,
    pub fits: Vec<SampleFit>,
    pub total_loss: f64,
}

impl JointModel {
    /// Reconstruct the per-sample mean vector over `bases` positions.
    pub fn mean_vector(&self, sample: usize, bases: usize) -> Vec<f64> {
        let fit = &self.fits[sample];
        let mut means = vec![fit.mean_left; bases];
        if fit.has_peak {
            let peak = self.peak.expect("peaked fit without a peak interval");
            means[peak.first_change..peak.last_change].fill(fit.mean_peak);
            means[peak.last_change..].fill(fit.mean_right);
        }
        means
    }
}

/// The fitted models for every feasible peak count `0..=S`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSequence {
    /// Indexed by peak count; `None` where no feasible model exists.
    pub models: Vec<Option<JointModel>>,
}

impl ModelSequence {
    /// Losses indexed by peak count, `None` for infeasible entries.
    pub fn losses(&self) -> Vec<Option<f64>> {
        self.models
            .iter()
            .map(|m| m.as_ref().map(|model| model.total_loss))
            .collect()
    }
}

/// Check every joint-model constraint against the problem it was fit on.
///
/// Verifies, per sample: at most one peak, indicator entries in {0, 1},
/// strictly alternating means around the shared interval, and means equal to
/// segment total over segment width. Also checks the peak-count bookkeeping
/// and the loss totals.
pub fn validate_joint_model(model: &JointModel, problem: &ProblemMatrix) -> Result<(), String> {
    let bases = problem.bases();
    let samples = problem.sample_count();
    if model.fits.len() != samples {
        return Err(format!(
            "model has {} fits for {} samples",
            model.fits.len(),
            samples
        ));
    }
    let peaked = model.fits.iter().filter(|f| f.has_peak).count();
    if peaked != model.peaks {
        return Err(format!(
            "model claims {} peaks but {} fits have one",
            model.peaks, peaked
        ));
    }
    match (model.peaks, model.peak) {
        (0, Some(_)) => return Err("flat model carries a peak interval".into()),
        (p, None) if p > 0 => return Err("peaked model without a peak interval".into()),
        (_, Some(peak))
            if (peak.first_change < 1
                || peak.last_change > bases - 1
                || peak.first_change >= peak.last_change) =>
        {
            return Err(format!(
                "peak [{}, {}) is not interior to {} bases",
                peak.first_change, peak.last_change, bases
            ));
        }
        _ => {}
    }

    let mut total = 0.0;
    for (s, fit) in model.fits.iter().enumerate() {
        let counts = problem.counts(s);
        let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if fit.has_peak {
            let peak = model.peak.unwrap();
            let left: u64 = counts[..peak.first_change]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            let peak_total: u64 = counts[peak.first_change..peak.last_change]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            let right = sum - left - peak_total;
            let expect_left = left as f64 / peak.first_change as f64;
            let expect_peak = peak_total as f64 / peak.width() as f64;
            let expect_right = right as f64 / (bases - peak.last_change) as f64;
            if fit.mean_left != expect_left
                || fit.mean_peak != expect_peak
                || fit.mean_right != expect_right
            {
                return Err(format!("sample {s}: means are not segment total / width"));
            }
            if !(fit.mean_peak > fit.mean_left && fit.mean_peak > fit.mean_right) {
                return Err(format!(
                    "sample {s}: means do not alternate strictly up then down"
                ));
            }
        } else if fit.mean_left != fit.mean_peak || fit.mean_peak != fit.mean_right {
            return Err(format!("sample {s}: flat fit with unequal means"));
        } else {
            let expect = sum as f64 / bases as f64;
            if fit.mean_left != expect {
                return Err(format!("sample {s}: flat mean is not total / bases"));
            }
        }

        let means = model.mean_vector(s, bases);
        let indicator = peak_indicator(&means);
        if indicator.iter().any(|&v| v != 0 && v != 1) {
            return Err(format!("sample {s}: peak indicator leaves {{0, 1}}"));
        }
        let (segments, peaks) = segments_and_peaks(&means);
        if (segments - 1) % 2 != 0 {
            return Err(format!("sample {s}: odd number of changes"));
        }
        let expected_peaks = usize::from(fit.has_peak);
        if peaks != expected_peaks {
            return Err(format!(
                "sample {s}: {peaks} peaks in mean vector, expected {expected_peaks}"
            ));
        }
        total += fit.loss;
    }

    let scale = model.total_loss.abs().max(1.0);
    if (model.total_loss - total).abs() > 1e-9 * scale {
        return Err(format!(
            "total loss {} does not match sum of per-sample losses {}",
            model.total_loss, total
        ));
    }
    Ok(())
}
