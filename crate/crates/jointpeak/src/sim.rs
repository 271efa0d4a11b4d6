//! Poisson count simulation with planted peaks, for tests and the timing
//! benchmark.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::coverage::ProblemMatrix;

/// Background rate used by the benchmark generator.
pub const BENCH_BACKGROUND_RATE: f64 = 2.0;
/// Peak rate used by the benchmark generator.
pub const BENCH_PEAK_RATE: f64 = 10.0;

/// Independent Poisson counts at a constant rate.
pub fn poisson_counts<R: Rng>(rng: &mut R, bases: usize, rate: f64) -> Vec<u32> {
    if rate == 0.0 {
        return vec![0; bases];
    }
    let distribution = Poisson::new(rate).expect("positive rate");
    (0..bases)
        .map(|_| distribution.sample(rng).min(u32::MAX as f64) as u32)
        .collect()
}

/// A problem with one planted peak over `[peak.0, peak.1)` in the flagged
/// samples; everything else is background.
pub fn planted_problem<R: Rng>(
    rng: &mut R,
    bases: usize,
    peaked: &[bool],
    peak: (usize, usize),
    background_rate: f64,
    peak_rate: f64,
) -> ProblemMatrix {
    assert!(peak.0 < peak.1 && peak.1 <= bases, "peak outside problem");
    let sample_ids = (0..peaked.len()).map(|i| format!("s{i}")).collect();
    let counts = peaked
        .iter()
        .map(|&has_peak| {
            let mut row = poisson_counts(rng, bases, background_rate);
            if has_peak {
                let bump = poisson_counts(rng, peak.1 - peak.0, peak_rate);
                row[peak.0..peak.1].copy_from_slice(&bump);
            }
            row
        })
        .collect();
    ProblemMatrix::new(0, sample_ids, counts).expect("simulated problem is valid")
}

/// The benchmark generator: one sample, background rate 2, one peak at rate 10
/// spanning the middle third.
pub fn bench_problem<R: Rng>(rng: &mut R, bases: usize) -> ProblemMatrix {
    let peak = (bases / 3, 2 * bases / 3);
    planted_problem(
        rng,
        bases,
        &[true],
        peak,
        BENCH_BACKGROUND_RATE,
        BENCH_PEAK_RATE,
    )
}
