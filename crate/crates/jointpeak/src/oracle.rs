//! Exact reference solvers for differential testing and the timing baseline.
//!
//! The joint brute force enumerates every interior change-point pair at base
//! resolution through the same scorer the zoom solver uses, so the two can
//! only disagree through the search strategy.

use crate::coverage::ProblemMatrix;
use crate::error::{Error, Result};
use crate::model::{segment_loss, JointModel, PeakInterval};
use crate::zoom::{build_model, PrefixStats, SegmentStats};

/// Largest problem the joint brute force accepts by default.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 200;

/// Globally optimal joint model with exactly `peaks` peaked samples, found by
/// checking all `C(B - 1, 2)` interior change-point pairs.
pub fn brute_force_joint(problem: &ProblemMatrix, peaks: usize) -> Result<Option<JointModel>> {
    brute_force_joint_capped(problem, peaks, DEFAULT_BRUTE_FORCE_CAP)
}

/// [`brute_force_joint`] with an explicit problem-size cap.
///
/// The enumeration and selection live here, independent of the zoom solver's
/// search; only the per-sample scoring is shared, so a disagreement between
/// the two isolates the search strategy.
pub fn brute_force_joint_capped(
    problem: &ProblemMatrix,
    peaks: usize,
    cap: usize,
) -> Result<Option<JointModel>> {
    if problem.bases() > cap {
        return Err(Error::invalid_input(format!(
            "problem of {} bases exceeds the brute-force cap of {cap}",
            problem.bases()
        )));
    }
    if peaks > problem.sample_count() {
        return Err(Error::invalid_input(format!(
            "requested {peaks} peaks over {} samples",
            problem.sample_count()
        )));
    }
    let stats = PrefixStats::new(problem);
    if peaks == 0 {
        return Ok(Some(build_model(&stats, None, &[])));
    }
    let bases = problem.bases();
    let samples = problem.sample_count();
    let mut best: Option<(f64, PeakInterval, Vec<usize>)> = None;
    let mut gains: Vec<(f64, usize)> = Vec::with_capacity(samples);
    for first in 1..bases - 1 {
        for last in first + 1..bases {
            gains.clear();
            for s in 0..samples {
                if let Some(delta) = stats.peak_gain(s, first, last) {
                    gains.push((delta, s));
                }
            }
            if gains.len() < peaks {
                continue;
            }
            gains.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let loss = stats.flat_total() + gains[..peaks].iter().map(|g| g.0).sum::<f64>();
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
    Ok(best.map(|(_, peak, chosen)| build_model(&stats, Some(peak), &chosen)))
}

/// Evaluate `argmin_p p * lambda + loss_p` on each grid value, ties to the
/// smaller peak count.
pub fn brute_force_model_selection(losses: &[Option<f64>], grid: &[f64]) -> Vec<(f64, usize)> {
    grid.iter()
        .map(|&lambda| {
            let mut best: Option<(f64, usize)> = None;
            for (p, loss) in losses.iter().enumerate() {
                let Some(loss) = loss else { continue };
                let cost = p as f64 * lambda + loss;
                if best.is_none_or(|(b, _)| cost < b) {
                    best = Some((cost, p));
                }
            }
            (lambda, best.expect("at least one model present").1)
        })
        .collect()
}

/// Exact best split of one sample into three segments, by dynamic programming
/// over the second change position. O(B^2) time, O(B) memory.
///
/// Returns `(first_change, last_change, loss)`; `None` when fewer than three
/// bases. Ties go to the smallest change positions.
pub fn three_segment_dp(counts: &[u32]) -> Option<(usize, usize, f64)> {
    let bases = counts.len();
    if bases < 3 {
        return None;
    }
    let mut prefix = Vec::with_capacity(bases + 1);
    prefix.push(0u64);
    let mut acc = 0u64;
    for &c in counts {
        acc += u64::from(c);
        prefix.push(acc);
    }
    let cost = |from: usize, to: usize| segment_loss(prefix[to] - prefix[from], (to - from) as u64);

    // best_two[j]: optimal 2-segment split of the prefix [0, j), with the
    // first change that achieves it.
    let mut best_two = vec![(f64::INFINITY, 0usize); bases + 1];
    for second in 2..bases {
        let mut best = (f64::INFINITY, 0usize);
        for first in 1..second {
            let loss = cost(0, first) + cost(first, second);
            if loss < best.0 {
                best = (loss, first);
            }
        }
        best_two[second] = best;
    }
    let mut result: Option<(usize, usize, f64)> = None;
    for second in 2..bases {
        let loss = best_two[second].0 + cost(second, bases);
        if result.is_none_or(|(_, _, b)| loss < b) {
            result = Some((best_two[second].1, second, loss));
        }
    }
    result
}
