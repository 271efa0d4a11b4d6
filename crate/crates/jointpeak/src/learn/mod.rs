//! Model-size selection and supervised penalty learning.
//!
//! The selection function solves `argmin_p p * lambda + loss_p` for every
//! penalty at once via the lower convex hull of `(p, loss)`. Labels turn the
//! selection function into a target interval of log-penalty values, and an
//! L1-regularized interval regression maps per-sample features to a predicted
//! log penalty.

mod fista;

pub use fista::{
    average_surrogate_grad, average_surrogate_loss, predictor_vectors, train_fista, FistaConfig,
    TrainedWeights,
};

use serde::{Deserialize, Serialize};

use crate::coverage::ProblemMatrix;
use crate::error::{Error, Result};

/// One piece of the selection function: `peaks` is optimal for
/// `lambda in [lambda_low, lambda_high)`. The lowest piece reaches down to 0
/// exclusive and the highest up to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionSegment {
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub peaks: usize,
}

/// The exact model-selection function over all positive penalties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFunction {
    /// Ascending in lambda, so peak counts are non-increasing.
    pub segments: Vec<SelectionSegment>,
}

impl SelectionFunction {
    /// The optimal peak count at one penalty; breakpoint ties go to the
    /// smaller count.
    pub fn select(&self, lambda: f64) -> usize {
        for segment in &self.segments {
            if lambda < segment.lambda_high {
                return segment.peaks;
            }
        }
        self.segments.last().expect("non-empty selection").peaks
    }
}

/// Exact selection breakpoints from the losses of a model sequence.
///
/// Only models on the lower convex hull of `(p, loss_p)` are ever selected;
/// between hull-adjacent counts `p < q` the breakpoint sits at
/// `(loss_p - loss_q) / (q - p)`.
pub fn selection_breakpoints(losses: &[Option<f64>]) -> Result<SelectionFunction> {
    if losses.first().is_none_or(|l| l.is_none()) {
        return Err(Error::invalid_input(
            "model selection needs the flat model's loss",
        ));
    }
    let points: Vec<(usize, f64)> = losses
        .iter()
        .enumerate()
        .filter_map(|(p, loss)| loss.map(|l| (p, l)))
        .collect();

    // Lower hull over points with strictly decreasing loss; a later model that
    // does not improve the loss can never win (ties go to the smaller count).
    let mut hull: Vec<(usize, f64)> = Vec::with_capacity(points.len());
    for &(p, loss) in &points {
        if hull.last().is_some_and(|&(_, prev)| loss >= prev) {
            continue;
        }
        while hull.len() >= 2 {
            let (p1, l1) = hull[hull.len() - 2];
            let (p2, l2) = hull[hull.len() - 1];
            let lambda_12 = (l1 - l2) / (p2 - p1) as f64;
            let lambda_2p = (l2 - loss) / (p - p2) as f64;
            if lambda_12 <= lambda_2p {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((p, loss));
    }

    let mut segments = Vec::with_capacity(hull.len());
    let mut high = f64::INFINITY;
    for window in hull.windows(2) {
        let (p1, l1) = window[0];
        let (p2, l2) = window[1];
        let breakpoint = (l1 - l2) / (p2 - p1) as f64;
        segments.push(SelectionSegment {
            lambda_low: breakpoint,
            lambda_high: high,
            peaks: p1,
        });
        high = breakpoint;
    }
    segments.push(SelectionSegment {
        lambda_low: 0.0,
        lambda_high: high,
        peaks: hull.last().expect("flat model always present").0,
    });
    segments.reverse();
    Ok(SelectionFunction { segments })
}

/// Range of log-penalty values whose selected model minimizes the label
/// error. Either endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetInterval {
    pub lower: f64,
    pub upper: f64,
}

impl TargetInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        // Rejects NaN endpoints along with empty intervals.
        if lower.partial_cmp(&upper) != Some(std::cmp::Ordering::Less) {
            return Err(Error::invalid_input(format!(
                "target interval ({lower}, {upper}) is empty"
            )));
        }
        Ok(TargetInterval { lower, upper })
    }

    pub fn is_unbounded(&self) -> bool {
        self.lower.is_infinite() && self.upper.is_infinite()
    }
}

/// Map label errors through the selection function to the widest run of
/// penalties achieving the minimum error.
///
/// `errors_by_peaks[p]` must be present for every count appearing in the
/// selection. Runs touching 0 or infinity get unbounded endpoints; among
/// equally wide runs the one at smaller penalties wins.
pub fn compute_target_interval(
    selection: &SelectionFunction,
    errors_by_peaks: &[Option<u32>],
) -> Result<TargetInterval> {
    let error_of = |peaks: usize| -> Result<u32> {
        errors_by_peaks
            .get(peaks)
            .copied()
            .flatten()
            .ok_or_else(|| {
                Error::invalid_input(format!("no label error recorded for {peaks} peaks"))
            })
    };
    let mut best_error = u32::MAX;
    for segment in &selection.segments {
        best_error = best_error.min(error_of(segment.peaks)?);
    }

    // Merge contiguous minimum-error segments into runs measured in log lambda.
    let mut best_run: Option<(f64, f64, f64)> = None; // (log length, lower, upper)
    let mut current: Option<(f64, f64)> = None;
    for segment in &selection.segments {
        if error_of(segment.peaks)? == best_error {
            let low = if segment.lambda_low == 0.0 {
                f64::NEG_INFINITY
            } else {
                segment.lambda_low.ln()
            };
            let high = segment.lambda_high.ln();
            current = match current {
                Some((run_low, _)) => Some((run_low, high)),
                None => Some((low, high)),
            };
        } else if let Some((low, high)) = current.take() {
            let length = high - low;
            if best_run.is_none_or(|(best, _, _)| length > best) {
                best_run = Some((length, low, high));
            }
        }
    }
    if let Some((low, high)) = current {
        let length = high - low;
        if best_run.is_none_or(|(best, _, _)| length > best) {
            best_run = Some((length, low, high));
        }
    }
    let (_, lower, upper) = best_run.expect("at least one minimum-error segment");
    TargetInterval::new(lower, upper)
}

/// Default per-sample features, one column per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Feature {
    /// Constant 1.
    Intercept,
    /// log(1 + total count).
    LogTotal,
    /// log(1 + max count).
    LogMax,
    /// log of the problem size in bases.
    LogBases,
    /// log(1 + upper-quartile count).
    LogQuartile,
}

pub const DEFAULT_FEATURES: [Feature; 5] = [
    Feature::Intercept,
    Feature::LogTotal,
    Feature::LogMax,
    Feature::LogBases,
    Feature::LogQuartile,
];

impl Feature {
    pub fn name(&self) -> &'static str {
        match self {
            Feature::Intercept => "intercept",
            Feature::LogTotal => "logTotal",
            Feature::LogMax => "logMax",
            Feature::LogBases => "logBases",
            Feature::LogQuartile => "logQuartile",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "intercept" => Ok(Feature::Intercept),
            "logTotal" => Ok(Feature::LogTotal),
            "logMax" => Ok(Feature::LogMax),
            "logBases" => Ok(Feature::LogBases),
            "logQuartile" => Ok(Feature::LogQuartile),
            other => Err(Error::invalid_input(format!("unknown feature {other:?}"))),
        }
    }
}

/// d x S feature matrix, one column per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    columns: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        if rows == 0 {
            return Err(Error::invalid_input("feature matrix needs d >= 1"));
        }
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid_input("feature columns differ in length"));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid_input("non-finite feature value"));
        }
        Ok(FeatureMatrix { rows, columns })
    }

    pub fn dimensions(&self) -> usize {
        self.rows
    }

    pub fn samples(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, sample: usize) -> &[f64] {
        &self.columns[sample]
    }

    /// Row sums over samples: the vector multiplying the weights in the
    /// linear prediction.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.rows];
        for column in &self.columns {
            for (sum, value) in sums.iter_mut().zip(column) {
                *sum += value;
            }
        }
        sums
    }

    /// Squared Frobenius norm.
    pub fn squared_norm(&self) -> f64 {
        self.columns.iter().flatten().map(|v| v * v).sum()
    }
}

/// Extract the default feature set from a problem.
pub fn extract_features(problem: &ProblemMatrix) -> FeatureMatrix {
    extract_features_with(problem, &DEFAULT_FEATURES)
}

/// Extract a chosen feature set, one column per sample.
pub fn extract_features_with(problem: &ProblemMatrix, features: &[Feature]) -> FeatureMatrix {
    let bases = problem.bases();
    let columns = (0..problem.sample_count())
        .map(|s| {
            let counts = problem.counts(s);
            features
                .iter()
                .map(|f| match f {
                    Feature::Intercept => 1.0,
                    Feature::LogTotal => {
                        let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
                        (1.0 + total as f64).ln()
                    }
                    Feature::LogMax => {
                        let max = counts.iter().copied().max().unwrap_or(0);
                        (1.0 + f64::from(max)).ln()
                    }
                    Feature::LogBases => (bases as f64).ln(),
                    Feature::LogQuartile => (1.0 + f64::from(upper_quartile(counts))).ln(),
                })
                .collect()
        })
        .collect();
    FeatureMatrix::from_columns(columns).expect("built-in features are finite")
}

/// Nearest-rank 75th percentile.
fn upper_quartile(counts: &[u32]) -> u32 {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let rank = (3 * sorted.len()).div_ceil(4);
    sorted[rank - 1]
}

/// Squared hinge: `(x - 1)^2` below the margin, 0 at or above it.
pub fn squared_hinge(x: f64) -> f64 {
    if x <= 1.0 {
        (x - 1.0) * (x - 1.0)
    } else {
        0.0
    }
}

pub(crate) fn squared_hinge_grad(x: f64) -> f64 {
    if x <= 1.0 {
        2.0 * (x - 1.0)
    } else {
        0.0
    }
}

/// Interval-regression loss of one predicted log penalty: a hinge on each
/// finite endpoint.
pub fn surrogate_loss(interval: &TargetInterval, log_lambda: f64) -> f64 {
    let mut loss = 0.0;
    if interval.lower.is_finite() {
        loss += squared_hinge(log_lambda - interval.lower);
    }
    if interval.upper.is_finite() {
        loss += squared_hinge(interval.upper - log_lambda);
    }
    loss
}

/// Linear prediction `w' X 1_S`, a log penalty.
pub fn predict_log_penalty(weights: &[f64], features: &FeatureMatrix) -> Result<f64> {
    if weights.len() != features.dimensions() {
        return Err(Error::invalid_input(format!(
            "{} weights for {} feature dimensions",
            weights.len(),
            features.dimensions()
        )));
    }
    Ok(features
        .row_sums()
        .iter()
        .zip(weights)
        .map(|(x, w)| x * w)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_model_selection;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn problem_from(counts: Vec<Vec<u32>>) -> ProblemMatrix {
        let ids = (0..counts.len()).map(|i| format!("s{i}")).collect();
        ProblemMatrix::new(0, ids, counts).unwrap()
    }

    #[test]
    fn breakpoints_of_a_three_model_sequence() {
        let selection = selection_breakpoints(&[Some(10.0), Some(6.0), Some(5.0)]).unwrap();
        assert_eq!(
            selection.segments,
            vec![
                SelectionSegment {
                    lambda_low: 0.0,
                    lambda_high: 1.0,
                    peaks: 2
                },
                SelectionSegment {
                    lambda_low: 1.0,
                    lambda_high: 4.0,
                    peaks: 1
                },
                SelectionSegment {
                    lambda_low: 4.0,
                    lambda_high: f64::INFINITY,
                    peaks: 0
                },
            ]
        );
        assert_eq!(selection.select(0.5), 2);
        assert_eq!(selection.select(1.0), 1);
        assert_eq!(selection.select(4.0), 0);
    }

    #[test]
    fn single_model_selected_everywhere() {
        let selection = selection_breakpoints(&[Some(10.0)]).unwrap();
        assert_eq!(selection.segments.len(), 1);
        assert_eq!(selection.select(1e-6), 0);
        assert_eq!(selection.select(1e6), 0);
    }

    #[test]
    fn hull_skips_a_dominated_model() {
        let selection = selection_breakpoints(&[Some(10.0), Some(9.0), Some(1.0)]).unwrap();
        assert_eq!(
            selection.segments,
            vec![
                SelectionSegment {
                    lambda_low: 0.0,
                    lambda_high: 4.5,
                    peaks: 2
                },
                SelectionSegment {
                    lambda_low: 4.5,
                    lambda_high: f64::INFINITY,
                    peaks: 0
                },
            ]
        );
    }

    #[test]
    fn breakpoints_agree_with_grid_argmin() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..50 {
            let count = rng.gen_range(1..=11usize);
            let losses: Vec<Option<f64>> = (0..count)
                .map(|p| {
                    if p > 0 && rng.gen_bool(0.2) {
                        None
                    } else {
                        Some(rng.gen_range(-50.0..50.0))
                    }
                })
                .collect();
            let selection = selection_breakpoints(&losses).unwrap();
            let grid: Vec<f64> = (0..200)
                .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0))
                .collect();
            for (lambda, expect) in brute_force_model_selection(&losses, &grid) {
                assert_eq!(selection.select(lambda), expect, "lambda {lambda}");
            }
        }
    }

    #[test]
    fn breakpoint_ties_go_to_the_smaller_count() {
        // Exactly representable breakpoints: the grid argmin sees a true tie
        // and must take the smaller count, like the selection function.
        for (losses, breakpoint, smaller) in [
            (vec![Some(10.0), Some(6.0), Some(5.0)], 4.0, 0usize),
            (vec![Some(10.0), Some(6.0), Some(5.0)], 1.0, 1),
            (vec![Some(10.0), Some(9.0), Some(1.0)], 4.5, 0),
        ] {
            let selection = selection_breakpoints(&losses).unwrap();
            assert_eq!(selection.select(breakpoint), smaller);
            let at = brute_force_model_selection(&losses, &[breakpoint]);
            assert_eq!(at[0].1, smaller);
        }

        // Around every breakpoint of random integer losses, both sides agree
        // with the grid argmin just off the tie.
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..50 {
            let losses: Vec<Option<f64>> = (0..rng.gen_range(2..8usize))
                .map(|_| Some(f64::from(rng.gen_range(-64..64i32))))
                .collect();
            let selection = selection_breakpoints(&losses).unwrap();
            for pair in selection.segments.windows(2) {
                let breakpoint = pair[0].lambda_high;
                let below = breakpoint * (1.0 - 1e-6);
                let above = breakpoint * (1.0 + 1e-6);
                let brute = brute_force_model_selection(&losses, &[below, above]);
                assert_eq!(brute[0].1, pair[0].peaks);
                assert_eq!(brute[1].1, pair[1].peaks);
                assert_eq!(selection.select(above), pair[1].peaks);
            }
        }
    }

    #[test]
    fn peak_count_non_increasing_in_lambda() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..50 {
            let losses: Vec<Option<f64>> =
                (0..6).map(|_| Some(rng.gen_range(-20.0..20.0))).collect();
            let selection = selection_breakpoints(&losses).unwrap();
            for pair in selection.segments.windows(2) {
                assert!(pair[0].peaks > pair[1].peaks);
                assert_eq!(pair[0].lambda_high, pair[1].lambda_low);
            }
        }
    }

    #[test]
    fn target_interval_when_flat_model_is_best() {
        let selection = selection_breakpoints(&[Some(10.0), Some(6.0), Some(5.0)]).unwrap();
        let target = compute_target_interval(&selection, &[Some(0), Some(1), Some(2)]).unwrap();
        assert!((target.lower - 4.0_f64.ln()).abs() < 1e-12);
        assert_eq!(target.upper, f64::INFINITY);
    }

    #[test]
    fn target_interval_with_equal_errors_is_unbounded() {
        let selection = selection_breakpoints(&[Some(10.0), Some(6.0), Some(5.0)]).unwrap();
        let target = compute_target_interval(&selection, &[Some(1), Some(1), Some(1)]).unwrap();
        assert!(target.is_unbounded());
    }

    #[test]
    fn target_interval_for_interior_optimum() {
        let selection = selection_breakpoints(&[Some(10.0), Some(6.0), Some(5.0)]).unwrap();
        let target = compute_target_interval(&selection, &[Some(2), Some(0), Some(1)]).unwrap();
        assert!((target.lower - 1.0_f64.ln()).abs() < 1e-12);
        assert!((target.upper - 4.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn features_of_all_zero_sample() {
        let problem = problem_from(vec![vec![0; 100]]);
        let features = extract_features(&problem);
        let column = features.column(0);
        assert_eq!(column[0], 1.0);
        assert_eq!(column[1], 0.0);
        assert_eq!(column[2], 0.0);
        assert!((column[3] - 100f64.ln()).abs() < 1e-12);
        assert_eq!(column[4], 0.0);
    }

    #[test]
    fn identical_samples_get_identical_columns() {
        let row = vec![1, 0, 7, 3, 3, 0, 2, 2];
        let problem = problem_from(vec![row.clone(), row]);
        let features = extract_features(&problem);
        assert_eq!(features.column(0), features.column(1));
    }

    #[test]
    fn doubling_counts_keeps_log_bases_fixed() {
        let row: Vec<u32> = vec![1, 0, 7, 3, 3, 0, 2, 2];
        let doubled: Vec<u32> = row.iter().map(|c| c * 2).collect();
        let a = extract_features(&problem_from(vec![row]));
        let b = extract_features(&problem_from(vec![doubled]));
        assert_eq!(a.column(0)[0], b.column(0)[0]);
        assert_eq!(a.column(0)[3], b.column(0)[3]);
        assert!(a.column(0)[1] < b.column(0)[1]);
    }

    #[test]
    fn squared_hinge_values() {
        assert_eq!(squared_hinge(2.0), 0.0);
        assert_eq!(squared_hinge(0.0), 1.0);
        assert_eq!(squared_hinge(-1.0), 4.0);
        assert_eq!(squared_hinge(1.0), 0.0);
    }

    #[test]
    fn surrogate_loss_examples() {
        let unbounded = TargetInterval::new(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_eq!(surrogate_loss(&unbounded, -100.0), 0.0);
        assert_eq!(surrogate_loss(&unbounded, 100.0), 0.0);

        let interval = TargetInterval::new(0.0, 10.0).unwrap();
        assert_eq!(surrogate_loss(&interval, 5.0), 0.0);
        assert_eq!(surrogate_loss(&interval, 0.0), 1.0);
    }

    #[test]
    fn surrogate_loss_is_convex_along_predictions() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..200 {
            let lower = rng.gen_range(-5.0..5.0);
            let interval = TargetInterval::new(lower, lower + rng.gen_range(0.1..8.0)).unwrap();
            let a = rng.gen_range(-10.0..10.0);
            let b = rng.gen_range(-10.0..10.0);
            let mid = 0.5 * (a + b);
            let bound = 0.5 * (surrogate_loss(&interval, a) + surrogate_loss(&interval, b));
            assert!(surrogate_loss(&interval, mid) <= bound + 1e-12);
        }
    }

    #[test]
    fn prediction_is_weighted_row_sum() {
        let features = FeatureMatrix::from_columns(vec![vec![1.0, 2.0], vec![1.0, 4.0]]).unwrap();
        assert_eq!(predict_log_penalty(&[0.0, 0.0], &features).unwrap(), 0.0);
        // Weight only the intercept row: prediction is the sample count.
        assert_eq!(predict_log_penalty(&[1.0, 0.0], &features).unwrap(), 2.0);
        // Doubling S with identical columns doubles the prediction.
        let single = FeatureMatrix::from_columns(vec![vec![1.0, 2.0]]).unwrap();
        let double = FeatureMatrix::from_columns(vec![vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let w = [0.3, -0.2];
        let one = predict_log_penalty(&w, &single).unwrap();
        let two = predict_log_penalty(&w, &double).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12);
    }

    #[test]
    fn prediction_rejects_dimension_mismatch() {
        let features = FeatureMatrix::from_columns(vec![vec![1.0, 2.0]]).unwrap();
        assert!(predict_log_penalty(&[1.0], &features).is_err());
    }
}
