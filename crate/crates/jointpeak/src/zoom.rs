//! The zoom solver: exhaustive grid search over coarse bin boundaries, then
//! windowed refinement at successively finer bin sizes until base resolution.
//!
//! A candidate is a pair of change positions `(first, last)` in base units;
//! its score is the total Poisson loss with every segment at its
//! maximum-likelihood mean. A sample can carry the peak only if its peak mean
//! strictly exceeds both background means; the comparison is done in integer
//! arithmetic so ties are classified exactly. The same scoring backs the
//! exhaustive oracle, which keeps any disagreement between the two down to
//! the search strategy; the crate-internal `SegmentStats` trait covers how
//! the two obtain segment totals.

use serde::Serialize;

use crate::coverage::{bin_count, ProblemMatrix};
use crate::error::{Error, Result};
use crate::model::{segment_loss, JointModel, ModelSequence, PeakInterval, SampleFit};

/// The coarsest zoom level must keep at least this many bins.
pub const DEFAULT_MIN_COARSE_BINS: usize = 6;

/// Largest power of `beta` that still leaves [`DEFAULT_MIN_COARSE_BINS`] bins.
pub fn max_bin_size(bases: usize, beta: usize) -> usize {
    max_bin_size_with(bases, beta, DEFAULT_MIN_COARSE_BINS)
}

/// Largest power of `beta` with at least `min_bins` bins; 1 if even `beta`
/// itself leaves too few.
pub fn max_bin_size_with(bases: usize, beta: usize, min_bins: usize) -> usize {
    assert!(beta >= 2, "zoom factor must be at least 2, got {beta}");
    let mut best = 1;
    let mut size = beta;
    while bin_count(bases, size) >= min_bins {
        best = size;
        size = match size.checked_mul(beta) {
            Some(next) => next,
            None => break,
        };
    }
    best
}

/// Bin sizes visited by the solver, coarsest first, ending at 1.
pub fn zoom_schedule(bases: usize, beta: usize) -> Vec<usize> {
    let mut size = max_bin_size(bases, beta);
    let mut schedule = vec![size];
    while size > 1 {
        size /= beta;
        schedule.push(size);
    }
    schedule
}

/// Segment totals and flat-fit losses for one problem.
///
/// Two providers implement this. [`PrefixStats`] answers a segment query in
/// O(1) from per-sample prefix-sum arrays built once per problem; it backs
/// the exhaustive oracle and the standalone grid-search and refinement
/// entry points. [`ScanStats`] evaluates a candidate model directly against
/// the data, costing O(B) per sample per model; the zoom solver uses it.
/// Both classify feasibility identically (exact integer comparisons), and
/// final model losses are always materialized through the same aggregated
/// arithmetic regardless of provider.
pub(crate) trait SegmentStats {
    fn bases(&self) -> usize;
    fn samples(&self) -> usize;
    fn sample_total(&self, sample: usize) -> u64;
    fn flat_loss(&self, sample: usize) -> f64;
    fn flat_total(&self) -> f64;
    fn segment_totals(&self, sample: usize, first: usize, last: usize) -> (u64, u64, u64);

    /// Loss delta of giving `sample` a peak over `[first, last)`, or `None`
    /// when the strict up/down requirement fails there.
    fn peak_gain(&self, sample: usize, first: usize, last: usize) -> Option<f64> {
        let width_left = first as u64;
        let width_peak = (last - first) as u64;
        let width_right = (self.bases() - last) as u64;
        let (left, peak, right) = self.segment_totals(sample, first, last);
        if !strictly_peaked(left, width_left, peak, width_peak, right, width_right) {
            return None;
        }
        let with_peak = segment_loss(left, width_left)
            + segment_loss(peak, width_peak)
            + segment_loss(right, width_right);
        Some(with_peak - self.flat_loss(sample))
    }
}

/// Per-sample prefix sums: O(SB) setup, O(1) per segment query.
pub(crate) struct PrefixStats {
    bases: usize,
    samples: usize,
    prefix: Vec<Vec<u64>>,
    totals: Vec<u64>,
    flat_loss: Vec<f64>,
    flat_total: f64,
}

impl PrefixStats {
    pub(crate) fn new(problem: &ProblemMatrix) -> Self {
        let bases = problem.bases();
        let samples = problem.sample_count();
        let mut prefix = Vec::with_capacity(samples);
        let mut totals = Vec::with_capacity(samples);
        let mut flat_loss = Vec::with_capacity(samples);
        for s in 0..samples {
            let mut row = Vec::with_capacity(bases + 1);
            let mut acc = 0u64;
            row.push(0);
            for &c in problem.counts(s) {
                acc += u64::from(c);
                row.push(acc);
            }
            totals.push(acc);
            flat_loss.push(segment_loss(acc, bases as u64));
            prefix.push(row);
        }
        let flat_total = flat_loss.iter().sum();
        PrefixStats {
            bases,
            samples,
            prefix,
            totals,
            flat_loss,
            flat_total,
        }
    }
}

impl SegmentStats for PrefixStats {
    fn bases(&self) -> usize {
        self.bases
    }

    fn samples(&self) -> usize {
        self.samples
    }

    fn sample_total(&self, sample: usize) -> u64 {
        self.totals[sample]
    }

    fn flat_loss(&self, sample: usize) -> f64 {
        self.flat_loss[sample]
    }

    fn flat_total(&self) -> f64 {
        self.flat_total
    }

    fn segment_totals(&self, sample: usize, first: usize, last: usize) -> (u64, u64, u64) {
        let row = &self.prefix[sample];
        let left = row[first];
        let peak = row[last] - left;
        let right = self.totals[sample] - row[last];
        (left, peak, right)
    }
}

/// Direct evaluation over the count vectors: scoring a candidate for one
/// sample scans that sample's counts to get the segment totals, then
/// evaluates the candidate's Poisson loss per base against the resulting
/// mean vector.
pub(crate) struct ScanStats<'a> {
    problem: &'a ProblemMatrix,
    totals: Vec<u64>,
    flat_loss: Vec<f64>,
    flat_total: f64,
}

impl<'a> ScanStats<'a> {
    pub(crate) fn new(problem: &'a ProblemMatrix) -> Self {
        let bases = problem.bases();
        let totals: Vec<u64> = (0..problem.sample_count())
            .map(|s| problem.counts(s).iter().map(|&c| u64::from(c)).sum())
            .collect();
        let flat_loss: Vec<f64> = totals
            .iter()
            .map(|&t| segment_loss(t, bases as u64))
            .collect();
        let flat_total = flat_loss.iter().sum();
        ScanStats {
            problem,
            totals,
            flat_loss,
            flat_total,
        }
    }
}

impl SegmentStats for ScanStats<'_> {
    fn bases(&self) -> usize {
        self.problem.bases()
    }

    fn samples(&self) -> usize {
        self.problem.sample_count()
    }

    fn sample_total(&self, sample: usize) -> u64 {
        self.totals[sample]
    }

    fn flat_loss(&self, sample: usize) -> f64 {
        self.flat_loss[sample]
    }

    fn flat_total(&self) -> f64 {
        self.flat_total
    }

    fn segment_totals(&self, sample: usize, first: usize, last: usize) -> (u64, u64, u64) {
        let counts = self.problem.counts(sample);
        let sum = |range: &[u32]| range.iter().map(|&c| u64::from(c)).sum::<u64>();
        let left = sum(&counts[..first]);
        let peak = sum(&counts[first..last]);
        let right = self.totals[sample] - left - peak;
        (left, peak, right)
    }

    fn peak_gain(&self, sample: usize, first: usize, last: usize) -> Option<f64> {
        let width_left = first as u64;
        let width_peak = (last - first) as u64;
        let width_right = (self.bases() - last) as u64;
        let (left, peak, right) = self.segment_totals(sample, first, last);
        if !strictly_peaked(left, width_left, peak, width_peak, right, width_right) {
            return None;
        }
        let counts = self.problem.counts(sample);
        let with_peak = per_base_loss(&counts[..first], left as f64 / width_left as f64)
            + per_base_loss(&counts[first..last], peak as f64 / width_peak as f64)
            + per_base_loss(&counts[last..], right as f64 / width_right as f64);
        Some(with_peak - self.flat_loss(sample))
    }
}

/// Poisson loss of one segment evaluated base by base against a fixed mean.
fn per_base_loss(counts: &[u32], mean: f64) -> f64 {
    if mean == 0.0 {
        // A zero mean only arises from an all-zero segment, which costs 0.
        return 0.0;
    }
    let log_mean = mean.ln();
    let mut loss = 0.0;
    for &z in counts {
        loss += mean - f64::from(z) * log_mean;
    }
    loss
}

/// Exact strict comparison of segment rates `peak/width_peak` against both
/// background rates, via integer cross-multiplication.
fn strictly_peaked(
    t_left: u64,
    w_left: u64,
    t_peak: u64,
    w_peak: u64,
    t_right: u64,
    w_right: u64,
) -> bool {
    if w_left == 0 || w_peak == 0 || w_right == 0 {
        return false;
    }
    let up = u128::from(t_peak) * u128::from(w_left) > u128::from(t_left) * u128::from(w_peak);
    let down = u128::from(t_peak) * u128::from(w_right) > u128::from(t_right) * u128::from(w_peak);
    up && down
}

/// Best model at one grid, plus how much of the grid was examined.
#[derive(Debug, Clone)]
pub struct GridFit {
    /// Change positions in base units; `None` for the flat fit (`p == 0`).
    pub peak: Option<PeakInterval>,
    /// Peaked samples, ascending.
    pub samples: Vec<usize>,
    pub total_loss: f64,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    /// `None` when no candidate admits the requested number of peaks.
    pub fit: Option<GridFit>,
    pub bins: usize,
    /// Candidate `(first, last)` pairs enumerated.
    pub candidates: u64,
}

/// Exhaustive search over all pairs of interior bin boundaries.
pub fn grid_search(problem: &ProblemMatrix, peaks: usize, bin_size: usize) -> Result<GridOutcome> {
    check_solver_args(problem, peaks)?;
    if bin_size < 1 {
        return Err(Error::invalid_input("bin size must be at least 1"));
    }
    if bin_count(problem.bases(), bin_size) < 3 {
        return Err(Error::invalid_input(format!(
            "bin size {bin_size} leaves fewer than 3 bins over {} bases",
            problem.bases()
        )));
    }
    let stats = PrefixStats::new(problem);
    Ok(grid_search_inner(&stats, peaks, bin_size))
}

fn grid_search_inner<T: SegmentStats>(stats: &T, peaks: usize, bin_size: usize) -> GridOutcome {
    let bins = bin_count(stats.bases(), bin_size);
    if peaks == 0 {
        return GridOutcome {
            fit: Some(GridFit {
                peak: None,
                samples: Vec::new(),
                total_loss: stats.flat_total(),
            }),
            bins,
            candidates: 0,
        };
    }

    let positions: Vec<usize> = (1..=stats.bases() / bin_size)
        .map(|j| j * bin_size)
        .collect();
    let mut candidates = 0u64;
    let mut best: Option<(f64, PeakInterval, Vec<usize>)> = None;
    let mut gains: Vec<(f64, usize)> = Vec::with_capacity(stats.samples());
    for (i, &first) in positions.iter().enumerate() {
        for &last in &positions[i + 1..] {
            candidates += 1;
            gains.clear();
            for s in 0..stats.samples() {
                if let Some(delta) = stats.peak_gain(s, first, last) {
                    gains.push((delta, s));
                }
            }
            if gains.len() < peaks {
                continue;
            }
            gains.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let loss: f64 = stats.flat_total() + gains[..peaks].iter().map(|g| g.0).sum::<f64>();
            if best.as_ref().is_none_or(|(b, _, _)| loss < *b) {
                let mut chosen: Vec<usize> = gains[..peaks].iter().map(|g| g.1).collect();
                chosen.sort_unstable();
                best = Some((
                    loss,
                    PeakInterval {
                        first_change: first,
                        last_change: last,
                    },
                    chosen,
                ));
            }
        }
    }
    GridOutcome {
        fit: best.map(|(total_loss, peak, samples)| GridFit {
            peak: Some(peak),
            samples,
            total_loss,
        }),
        bins,
        candidates,
    }
}

/// Result of one refinement step.
#[derive(Debug, Clone, Copy)]
pub struct RefineOutcome {
    pub peak: PeakInterval,
    /// Candidate pairs evaluated after clamping to the problem interior.
    pub evaluated: u64,
}

/// Refine a peak on the grid of `bin_size` around its current boundaries.
///
/// Each boundary moves within a window of `2 * beta` positions spaced
/// `bin_size` apart, clamped to the problem interior. The peaked sample set
/// stays fixed; a candidate is feasible only if every fixed sample keeps the
/// strict up/down shape. When nothing feasible is found the incoming peak is
/// returned unchanged.
pub fn search_near_peak(
    problem: &ProblemMatrix,
    samples: &[usize],
    bin_size: usize,
    beta: usize,
    peak: PeakInterval,
) -> Result<RefineOutcome> {
    check_solver_args(problem, samples.len())?;
    if samples.iter().any(|&s| s >= problem.sample_count()) {
        return Err(Error::invalid_input("peaked sample index out of range"));
    }
    if bin_size < 1 {
        return Err(Error::invalid_input("bin size must be at least 1"));
    }
    if beta < 2 {
        return Err(Error::invalid_input("zoom factor must be at least 2"));
    }
    let stats = PrefixStats::new(problem);
    Ok(search_near_peak_inner(
        &stats, samples, bin_size, beta, peak,
    ))
}

fn search_near_peak_inner<T: SegmentStats>(
    stats: &T,
    samples: &[usize],
    bin_size: usize,
    beta: usize,
    peak: PeakInterval,
) -> RefineOutcome {
    let starts = refine_positions(peak.first_change, bin_size, beta, stats.bases());
    let ends = refine_positions(peak.last_change, bin_size, beta, stats.bases());
    let mut evaluated = 0u64;
    let mut best: Option<(f64, PeakInterval)> = None;
    for &first in &starts {
        for &last in &ends {
            if first >= last {
                continue;
            }
            evaluated += 1;
            if let Some(loss) = fixed_set_loss(stats, samples, first, last) {
                if best.as_ref().is_none_or(|(b, _)| loss < *b) {
                    best = Some((
                        loss,
                        PeakInterval {
                            first_change: first,
                            last_change: last,
                        },
                    ));
                }
            }
        }
    }
    RefineOutcome {
        peak: best.map_or(peak, |(_, p)| p),
        evaluated,
    }
}

/// `2 * beta` positions spaced `bin_size` apart around `center`, clamped to
/// the interior `[1, bases - 1]` and deduplicated.
fn refine_positions(center: usize, bin_size: usize, beta: usize, bases: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * beta);
    let center = center as i64;
    let step = bin_size as i64;
    for k in (1 - beta as i64)..=(beta as i64) {
        let position = (center + k * step).clamp(1, bases as i64 - 1) as usize;
        if out.last() != Some(&position) {
            out.push(position);
        }
    }
    out
}

fn fixed_set_loss<T: SegmentStats>(
    stats: &T,
    samples: &[usize],
    first: usize,
    last: usize,
) -> Option<f64> {
    let mut loss = stats.flat_total();
    for &s in samples {
        loss += stats.peak_gain(s, first, last)?;
    }
    Some(loss)
}

/// One visited zoom level.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZoomLevel {
    pub bin_size: usize,
    pub bins: usize,
    /// Candidates examined at this level.
    pub candidates: u64,
}

/// Bin sizes visited and candidates examined during one solve.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ZoomTrace {
    pub levels: Vec<ZoomLevel>,
}

impl ZoomTrace {
    pub fn bin_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.bin_size).collect()
    }
}

/// Fit the most likely joint model with exactly `peaks` peaked samples.
///
/// Runs the grid search at the coarsest bin size, then halves (more generally
/// divides by `beta`) the bin size and refines until base resolution. Returns
/// `None` when no feasible model with that many peaks exists.
pub fn joint_zoom(
    problem: &ProblemMatrix,
    peaks: usize,
    beta: usize,
) -> Result<Option<JointModel>> {
    joint_zoom_traced(problem, peaks, beta).map(|(model, _)| model)
}

/// [`joint_zoom`] plus the per-level search trace.
pub fn joint_zoom_traced(
    problem: &ProblemMatrix,
    peaks: usize,
    beta: usize,
) -> Result<(Option<JointModel>, ZoomTrace)> {
    check_solver_args(problem, peaks)?;
    if beta < 2 {
        return Err(Error::invalid_input("zoom factor must be at least 2"));
    }
    let stats = ScanStats::new(problem);
    Ok(joint_zoom_inner(&stats, peaks, beta))
}

fn joint_zoom_inner<T: SegmentStats>(
    stats: &T,
    peaks: usize,
    beta: usize,
) -> (Option<JointModel>, ZoomTrace) {
    let mut trace = ZoomTrace::default();
    if peaks == 0 {
        return (Some(build_model(stats, None, &[])), trace);
    }
    let mut bin_size = max_bin_size(stats.bases(), beta);
    let outcome = grid_search_inner(stats, peaks, bin_size);
    trace.levels.push(ZoomLevel {
        bin_size,
        bins: outcome.bins,
        candidates: outcome.candidates,
    });
    let fit = match outcome.fit {
        Some(fit) => fit,
        None => return (None, trace),
    };
    let samples = fit.samples;
    let mut peak = fit
        .peak
        .expect("grid search with peaks > 0 returns an interval");
    while bin_size > 1 {
        bin_size /= beta;
        let refined = search_near_peak_inner(stats, &samples, bin_size, beta, peak);
        peak = refined.peak;
        trace.levels.push(ZoomLevel {
            bin_size,
            bins: bin_count(stats.bases(), bin_size),
            candidates: refined.evaluated,
        });
    }
    (Some(build_model(stats, Some(peak), &samples)), trace)
}

/// Assemble the final model with exact segment means and losses at base
/// resolution.
pub(crate) fn build_model<T: SegmentStats>(
    stats: &T,
    peak: Option<PeakInterval>,
    samples: &[usize],
) -> JointModel {
    let bases = stats.bases() as f64;
    let mut fits: Vec<SampleFit> = (0..stats.samples())
        .map(|s| SampleFit::flat(stats.sample_total(s) as f64 / bases, stats.flat_loss(s)))
        .collect();
    if let Some(peak) = peak {
        let width_left = peak.first_change as u64;
        let width_peak = peak.width() as u64;
        let width_right = (stats.bases() - peak.last_change) as u64;
        for &s in samples {
            let (left, mid, right) = stats.segment_totals(s, peak.first_change, peak.last_change);
            fits[s] = SampleFit {
                has_peak: true,
                mean_left: left as f64 / width_left as f64,
                mean_peak: mid as f64 / width_peak as f64,
                mean_right: right as f64 / width_right as f64,
                loss: segment_loss(left, width_left)
                    + segment_loss(mid, width_peak)
                    + segment_loss(right, width_right),
            };
        }
    }
    let total_loss = fits.iter().map(|f| f.loss).sum();
    JointModel {
        peaks: samples.len(),
        peak,
        fits,
        total_loss,
    }
}

/// Materialize a grid fit as a full joint model with exact base-resolution
/// means and losses.
pub fn model_from_fit(problem: &ProblemMatrix, fit: &GridFit) -> JointModel {
    let stats = PrefixStats::new(problem);
    build_model(&stats, fit.peak, &fit.samples)
}

/// Fit the whole model sequence, one model per peak count `0..=S`.
pub fn fit_model_sequence(problem: &ProblemMatrix, beta: usize) -> Result<ModelSequence> {
    if beta < 2 {
        return Err(Error::invalid_input("zoom factor must be at least 2"));
    }
    let stats = ScanStats::new(problem);
    let models = (0..=problem.sample_count())
        .map(|peaks| joint_zoom_inner(&stats, peaks, beta).0)
        .collect();
    Ok(ModelSequence { models })
}

fn check_solver_args(problem: &ProblemMatrix, peaks: usize) -> Result<()> {
    if peaks > problem.sample_count() {
        return Err(Error::invalid_input(format!(
            "requested {peaks} peaks over {} samples",
            problem.sample_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::ProblemMatrix;

    fn problem_from(counts: Vec<Vec<u32>>) -> ProblemMatrix {
        let ids = (0..counts.len()).map(|i| format!("s{i}")).collect();
        ProblemMatrix::new(0, ids, counts).unwrap()
    }

    #[test]
    fn max_bin_size_known_cases() {
        assert_eq!(max_bin_size(24, 2), 4);
        assert_eq!(max_bin_size(85846, 2), 16384);
        assert_eq!(max_bin_size(10, 2), 2);
    }

    #[test]
    fn max_bin_size_falls_back_to_one() {
        assert_eq!(max_bin_size(4, 2), 1);
        assert_eq!(max_bin_size(9, 2), 1);
    }

    #[test]
    fn schedule_for_small_problem() {
        assert_eq!(zoom_schedule(24, 2), vec![4, 2, 1]);
    }

    #[test]
    fn schedule_for_large_problem() {
        let schedule = zoom_schedule(85846, 2);
        assert_eq!(schedule.len(), 15);
        assert_eq!(schedule[0], 16384);
        assert_eq!(schedule[1], 8192);
        assert_eq!(*schedule.last().unwrap(), 1);
    }

    #[test]
    fn grid_candidate_counts_match_bin_counts() {
        // 7 bins -> C(6, 2) = 15 candidates; 6 bins -> C(5, 2) = 10.
        let problem = problem_from(vec![vec![1; 24]]);
        let outcome = grid_search(&problem, 1, 4).unwrap();
        assert_eq!(outcome.bins, 7);
        assert_eq!(outcome.candidates, 15);

        let mut counts = vec![0u32; 85846];
        counts[40000..41000].fill(9);
        let problem = problem_from(vec![counts]);
        let outcome = grid_search(&problem, 1, 16384).unwrap();
        assert_eq!(outcome.bins, 6);
        assert_eq!(outcome.candidates, 10);
    }

    #[test]
    fn grid_search_finds_exact_peak_at_unit_bins() {
        let problem = problem_from(vec![vec![0, 0, 9, 9, 0, 0]]);
        let outcome = grid_search(&problem, 1, 1).unwrap();
        let fit = outcome.fit.unwrap();
        let peak = fit.peak.unwrap();
        assert_eq!((peak.first_change, peak.last_change), (2, 4));
        let expected = 18.0 - 18.0 * 9.0_f64.ln();
        assert!((fit.total_loss - expected).abs() < 1e-12);
        assert_eq!(fit.samples, vec![0]);
    }

    #[test]
    fn grid_search_flat_when_no_peaks_requested() {
        let problem = problem_from(vec![vec![0, 0, 9, 9, 0, 0]]);
        let outcome = grid_search(&problem, 0, 1).unwrap();
        let fit = outcome.fit.unwrap();
        assert!(fit.peak.is_none());
        assert!(fit.samples.is_empty());
        assert_eq!(outcome.candidates, 0);
    }

    #[test]
    fn grid_search_infeasible_on_flat_data() {
        let problem = problem_from(vec![vec![0; 12]]);
        let outcome = grid_search(&problem, 1, 1).unwrap();
        assert!(outcome.fit.is_none());
        let problem = problem_from(vec![vec![5; 12]]);
        let outcome = grid_search(&problem, 1, 1).unwrap();
        assert!(outcome.fit.is_none());
    }

    #[test]
    fn refinement_window_has_sixteen_candidates() {
        let mut counts = vec![0u32; 40];
        counts[16..24].fill(9);
        let problem = problem_from(vec![counts]);
        let peak = PeakInterval {
            first_change: 16,
            last_change: 24,
        };
        let refined = search_near_peak(&problem, &[0], 2, 2, peak).unwrap();
        assert_eq!(refined.evaluated, 16);
    }

    #[test]
    fn refinement_keeps_an_already_optimal_peak() {
        let mut counts = vec![0u32; 40];
        counts[16..24].fill(9);
        let problem = problem_from(vec![counts]);
        let peak = PeakInterval {
            first_change: 16,
            last_change: 24,
        };
        let refined = search_near_peak(&problem, &[0], 1, 2, peak).unwrap();
        assert_eq!(refined.peak, peak);
    }

    #[test]
    fn refinement_shifts_to_an_off_grid_boundary() {
        // True boundaries at 5 and 11 sit off the bin-2 grid.
        let mut counts = vec![0u32; 16];
        counts[5..11].fill(9);
        let problem = problem_from(vec![counts]);
        let (model, trace) = joint_zoom_traced(&problem, 1, 2).unwrap();
        assert_eq!(trace.bin_sizes(), vec![2, 1]);
        let model = model.unwrap();
        let peak = model.peak.unwrap();
        assert_eq!((peak.first_change, peak.last_change), (5, 11));
    }

    #[test]
    fn flat_model_loss_is_sum_of_flat_fits() {
        let problem = problem_from(vec![vec![1, 2, 3, 4, 5, 6], vec![0, 0, 0, 0, 0, 0]]);
        let model = joint_zoom(&problem, 0, 2).unwrap().unwrap();
        assert_eq!(model.peaks, 0);
        assert!(model.peak.is_none());
        let expected = segment_loss(21, 6);
        assert!((model.total_loss - expected).abs() < 1e-12);
    }

    #[test]
    fn sequence_has_one_model_per_peak_count() {
        let counts: Vec<Vec<u32>> = (0..3)
            .map(|s| {
                let mut row = vec![1u32; 30];
                if s < 2 {
                    row[10..20].fill(8);
                }
                row
            })
            .collect();
        let problem = problem_from(counts);
        let sequence = fit_model_sequence(&problem, 2).unwrap();
        assert_eq!(sequence.models.len(), 4);
        assert!(sequence.models[0].is_some());
    }

    #[test]
    fn all_zero_data_only_fits_flat() {
        let problem = problem_from(vec![vec![0; 20], vec![0; 20]]);
        let sequence = fit_model_sequence(&problem, 2).unwrap();
        assert!(sequence.models[0].is_some());
        assert!(sequence.models[1].is_none());
        assert!(sequence.models[2].is_none());
    }

    #[test]
    fn rejects_more_peaks_than_samples() {
        let problem = problem_from(vec![vec![1; 10]]);
        assert!(joint_zoom(&problem, 2, 2).is_err());
    }

    #[test]
    fn rejects_zoom_factor_below_two() {
        let problem = problem_from(vec![vec![1; 10]]);
        assert!(joint_zoom(&problem, 1, 1).is_err());
    }

    #[test]
    fn scan_and_prefix_providers_agree() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..50 {
            let bases = rng.gen_range(6..80usize);
            let counts: Vec<Vec<u32>> = (0..rng.gen_range(1..4usize))
                .map(|_| (0..bases).map(|_| rng.gen_range(0..12u32)).collect())
                .collect();
            let problem = problem_from(counts);
            let prefix = PrefixStats::new(&problem);
            let scan = ScanStats::new(&problem);
            for peaks in 0..=problem.sample_count() {
                let a = joint_zoom_inner(&prefix, peaks, 2).0;
                let b = joint_zoom_inner(&scan, peaks, 2).0;
                match (a, b) {
                    (Some(a), Some(b)) => {
                        // Scoring arithmetic differs only in rounding, so the
                        // reported (exactly aggregated) losses must agree.
                        let scale = a.total_loss.abs().max(1.0);
                        assert!((a.total_loss - b.total_loss).abs() <= 1e-9 * scale);
                        assert_eq!(a.peak, b.peak);
                        assert_eq!(a.peaks, b.peaks);
                    }
                    (None, None) => {}
                    _ => panic!("providers disagree on feasibility"),
                }
            }
        }
    }

    #[test]
    fn visits_expected_levels_for_small_problem() {
        let mut counts = vec![1u32; 24];
        counts[8..16].fill(9);
        let problem = problem_from(vec![counts]);
        let (_, trace) = joint_zoom_traced(&problem, 1, 2).unwrap();
        assert_eq!(trace.bin_sizes(), vec![4, 2, 1]);
        assert_eq!(trace.levels[0].candidates, 15);
    }
}
