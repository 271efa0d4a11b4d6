//! Coverage ingestion: bedGraph parsing, window tiling, problem extraction,
//! and binning.
//!
//! Coordinates are 0-based half-open throughout. Missing coverage means
//! count 0, not missing data.

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Smallest problem that admits an interior peak with background on both sides.
pub const MIN_PROBLEM_BASES: usize = 4;

/// One run-length encoded coverage record: `count` reads per base over
/// `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageRun {
    pub start: u64,
    pub end: u64,
    pub count: u32,
}

/// Ordered, non-overlapping runs for one sample on one chromosome. Gaps are
/// read as count 0.
#[derive(Debug, Clone)]
pub struct CoverageProfile {
    pub sample_id: String,
    runs: Vec<CoverageRun>,
}

impl CoverageProfile {
    /// Sorts the runs and rejects overlaps and empty intervals.
    pub fn new(sample_id: impl Into<String>, mut runs: Vec<CoverageRun>) -> Result<Self> {
        runs.sort_by_key(|r| r.start);
        validate_runs(&runs)?;
        Ok(CoverageProfile {
            sample_id: sample_id.into(),
            runs,
        })
    }

    pub fn runs(&self) -> &[CoverageRun] {
        &self.runs
    }
}

fn validate_runs(runs: &[CoverageRun]) -> Result<()> {
    for run in runs {
        if run.start >= run.end {
            return Err(Error::invalid_input(format!(
                "empty coverage interval [{}, {})",
                run.start, run.end
            )));
        }
    }
    for pair in runs.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(Error::invalid_input(format!(
                "overlapping coverage runs at {} and {}",
                pair[0].start, pair[1].start
            )));
        }
    }
    Ok(())
}

/// Parse a bedGraph stream into per-chromosome runs.
///
/// Lines are `chrom<TAB>start<TAB>end<TAB>count`. Header lines starting with
/// `track`, `browser`, or `#` are skipped. Zero-count runs are preserved.
pub fn parse_bedgraph<R: BufRead>(reader: R) -> Result<BTreeMap<String, Vec<CoverageRun>>> {
    let mut by_chrom: BTreeMap<String, Vec<CoverageRun>> = BTreeMap::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let trimmed = line.trim_end();
        if trimmed.is_empty()
            || trimmed.starts_with('#')
            || trimmed.starts_with("track")
            || trimmed.starts_with("browser")
        {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let start: u64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad start {:?}", fields[1])))?;
        let end: u64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad end {:?}", fields[2])))?;
        let count: u32 = fields[3]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad count {:?}", fields[3])))?;
        if start >= end {
            return Err(Error::parse(
                line_no,
                format!("empty interval [{start}, {end})"),
            ));
        }
        by_chrom
            .entry(fields[0].to_string())
            .or_default()
            .push(CoverageRun { start, end, count });
    }
    for (chrom, runs) in &mut by_chrom {
        runs.sort_by_key(|r| r.start);
        validate_runs(runs).map_err(|e| Error::invalid_input(format!("{chrom}: {e}")))?;
    }
    Ok(by_chrom)
}

/// One row of the samples manifest: `sampleId<TAB>path<TAB>cellType`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleEntry {
    pub sample_id: String,
    pub path: String,
    pub cell_type: String,
}

pub fn parse_manifest<R: BufRead>(reader: R) -> Result<Vec<SampleEntry>> {
    let mut entries = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let trimmed = line.trim_end();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        entries.push(SampleEntry {
            sample_id: fields[0].to_string(),
            path: fields[1].to_string(),
            cell_type: fields[2].to_string(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for entry in &entries {
        if !seen.insert(entry.sample_id.as_str()) {
            return Err(Error::invalid_input(format!(
                "duplicate sample id {:?} in manifest",
                entry.sample_id
            )));
        }
    }
    Ok(entries)
}

/// Aligned dense count vectors for S samples over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemMatrix {
    window_start: u64,
    sample_ids: Vec<String>,
    counts: Vec<Vec<u32>>,
}

impl ProblemMatrix {
    pub fn new(window_start: u64, sample_ids: Vec<String>, counts: Vec<Vec<u32>>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid_input("problem needs at least one sample"));
        }
        if counts.len() != sample_ids.len() {
            return Err(Error::invalid_input(format!(
                "{} sample ids for {} count vectors",
                sample_ids.len(),
                counts.len()
            )));
        }
        let bases = counts[0].len();
        if bases < MIN_PROBLEM_BASES {
            return Err(Error::invalid_input(format!(
                "problem spans {bases} bases, need at least {MIN_PROBLEM_BASES}"
            )));
        }
        if counts.iter().any(|row| row.len() != bases) {
            return Err(Error::invalid_input("sample vectors differ in length"));
        }
        Ok(ProblemMatrix {
            window_start,
            sample_ids,
            counts,
        })
    }

    pub fn window_start(&self) -> u64 {
        self.window_start
    }

    pub fn bases(&self) -> usize {
        self.counts[0].len()
    }

    pub fn sample_count(&self) -> usize {
        self.counts.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn counts(&self, sample: usize) -> &[u32] {
        &self.counts[sample]
    }
}

/// Materialize a dense problem over `[window_start, window_start + bases)`.
///
/// Positions not covered by any run are filled with 0.
pub fn extract_problem(
    profiles: &[CoverageProfile],
    window_start: u64,
    bases: usize,
) -> Result<ProblemMatrix> {
    if bases < MIN_PROBLEM_BASES {
        return Err(Error::invalid_input(format!(
            "window of {bases} bases is below the minimum of {MIN_PROBLEM_BASES}"
        )));
    }
    let window_end = window_start + bases as u64;
    let mut sample_ids = Vec::with_capacity(profiles.len());
    let mut counts = Vec::with_capacity(profiles.len());
    for profile in profiles {
        let mut dense = vec![0u32; bases];
        for run in profile.runs() {
            if run.end <= window_start || run.start >= window_end {
                continue;
            }
            let from = run.start.max(window_start) - window_start;
            let to = run.end.min(window_end) - window_start;
            dense[from as usize..to as usize].fill(run.count);
        }
        sample_ids.push(profile.sample_id.clone());
        counts.push(dense);
    }
    ProblemMatrix::new(window_start, sample_ids, counts)
}

/// One tile of a larger window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileWindow {
    pub start: u64,
    pub end: u64,
}

impl TileWindow {
    pub fn bases(&self) -> usize {
        (self.end - self.start) as usize
    }
}

/// Divide `[window_start, window_end)` into tiles of `bases` positions
/// advancing by `bases * (1 - overlap_fraction)`.
///
/// The last tile is shifted left so it ends exactly at `window_end`. A window
/// shorter than `bases` yields a single tile spanning the whole window.
pub fn tile_window(
    window_start: u64,
    window_end: u64,
    bases: usize,
    overlap_fraction: f64,
) -> Result<Vec<TileWindow>> {
    if window_end <= window_start {
        return Err(Error::invalid_input(format!(
            "empty window [{window_start}, {window_end})"
        )));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::invalid_input(format!(
            "overlap fraction {overlap_fraction} outside [0, 1)"
        )));
    }
    let span = window_end - window_start;
    if span <= bases as u64 {
        return Ok(vec![TileWindow {
            start: window_start,
            end: window_end,
        }]);
    }
    let stride = ((bases as f64) * (1.0 - overlap_fraction)).round().max(1.0) as u64;
    let mut tiles = Vec::new();
    let mut start = window_start;
    while start + bases as u64 <= window_end {
        tiles.push(TileWindow {
            start,
            end: start + bases as u64,
        });
        start += stride;
    }
    let tail = TileWindow {
        start: window_end - bases as u64,
        end: window_end,
    };
    if tiles.last() != Some(&tail) {
        tiles.push(tail);
    }
    Ok(tiles)
}

/// How many bins a problem of `bases` positions has at `bin_size`.
///
/// Always `floor(bases / bin_size) + 1`, with a trailing partial bin that is
/// empty when `bin_size` divides `bases`.
pub fn bin_count(bases: usize, bin_size: usize) -> usize {
    bases / bin_size + 1
}

/// Binned view of a problem: per-bin count totals plus the bases each bin
/// covers.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedProblem {
    bin_size: usize,
    bin_totals: Vec<Vec<u64>>,
    bin_widths: Vec<u64>,
}

impl BinnedProblem {
    pub fn bin_size(&self) -> usize {
        self.bin_size
    }

    pub fn bins(&self) -> usize {
        self.bin_widths.len()
    }

    pub fn totals(&self, sample: usize) -> &[u64] {
        &self.bin_totals[sample]
    }

    pub fn widths(&self) -> &[u64] {
        &self.bin_widths
    }
}

/// Sum counts into bins of `bin_size` bases. Bin `j < b - 1` covers
/// `[j * bin_size, (j + 1) * bin_size)`; the final bin covers the remainder
/// and may be empty.
pub fn bin_problem(problem: &ProblemMatrix, bin_size: usize) -> Result<BinnedProblem> {
    if bin_size < 1 {
        return Err(Error::invalid_input("bin size must be at least 1"));
    }
    let bases = problem.bases();
    let bins = bin_count(bases, bin_size);
    let mut bin_widths = vec![bin_size as u64; bins];
    bin_widths[bins - 1] = (bases - (bins - 1) * bin_size) as u64;
    let mut bin_totals = Vec::with_capacity(problem.sample_count());
    for s in 0..problem.sample_count() {
        let counts = problem.counts(s);
        let mut totals = vec![0u64; bins];
        for (i, &c) in counts.iter().enumerate() {
            totals[(i / bin_size).min(bins - 1)] += u64::from(c);
        }
        bin_totals.push(totals);
    }
    Ok(BinnedProblem {
        bin_size,
        bin_totals,
        bin_widths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn problem_from(counts: Vec<Vec<u32>>) -> ProblemMatrix {
        let ids = (0..counts.len()).map(|i| format!("s{i}")).collect();
        ProblemMatrix::new(0, ids, counts).unwrap()
    }

    #[test]
    fn parses_single_record() {
        let runs = parse_bedgraph("chr1\t0\t5\t3".as_bytes()).unwrap();
        assert_eq!(
            runs["chr1"],
            vec![CoverageRun {
                start: 0,
                end: 5,
                count: 3
            }]
        );
    }

    #[test]
    fn rejects_empty_interval() {
        let err = parse_bedgraph("chr1\t5\t5\t1".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_overlapping_runs() {
        let text = "chr1\t0\t5\t1\nchr1\t3\t8\t2\n";
        let err = parse_bedgraph(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)), "{err}");
    }

    #[test]
    fn reports_line_number_of_bad_field() {
        let text = "chr1\t0\t5\t1\nchr1\tfive\t8\t2\n";
        let err = parse_bedgraph(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn preserves_zero_count_runs() {
        let runs = parse_bedgraph("chr1\t0\t5\t0".as_bytes()).unwrap();
        assert_eq!(runs["chr1"][0].count, 0);
    }

    #[test]
    fn groups_runs_by_chromosome() {
        let text = "track type=bedGraph\nchr2\t0\t4\t1\nchr1\t3\t9\t2\nchr1\t0\t3\t5\n";
        let runs = parse_bedgraph(text.as_bytes()).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs["chr1"][0].start, 0);
        assert_eq!(runs["chr1"][1].start, 3);
        assert_eq!(runs["chr2"].len(), 1);
    }

    #[test]
    fn extracts_dense_matrix() {
        let profiles = vec![
            CoverageProfile::new(
                "a",
                vec![CoverageRun {
                    start: 0,
                    end: 24,
                    count: 2,
                }],
            )
            .unwrap(),
            CoverageProfile::new(
                "b",
                vec![CoverageRun {
                    start: 0,
                    end: 24,
                    count: 5,
                }],
            )
            .unwrap(),
        ];
        let problem = extract_problem(&profiles, 0, 24).unwrap();
        assert_eq!(problem.sample_count(), 2);
        assert_eq!(problem.bases(), 24);
        assert!(problem.counts(0).iter().all(|&c| c == 2));
        assert!(problem.counts(1).iter().all(|&c| c == 5));
    }

    #[test]
    fn empty_profile_becomes_zeros() {
        let profiles = vec![CoverageProfile::new("a", vec![]).unwrap()];
        let problem = extract_problem(&profiles, 0, 24).unwrap();
        assert!(problem.counts(0).iter().all(|&c| c == 0));
    }

    #[test]
    fn rejects_tiny_window() {
        let profiles = vec![CoverageProfile::new("a", vec![]).unwrap()];
        assert!(extract_problem(&profiles, 0, 3).is_err());
    }

    #[test]
    fn clips_runs_to_window() {
        let profiles = vec![CoverageProfile::new(
            "a",
            vec![CoverageRun {
                start: 5,
                end: 100,
                count: 7,
            }],
        )
        .unwrap()];
        let problem = extract_problem(&profiles, 10, 20).unwrap();
        assert!(problem.counts(0).iter().all(|&c| c == 7));
    }

    #[test]
    fn disjoint_tiles() {
        let tiles = tile_window(0, 100, 50, 0.0).unwrap();
        assert_eq!(
            tiles,
            vec![
                TileWindow { start: 0, end: 50 },
                TileWindow {
                    start: 50,
                    end: 100
                }
            ]
        );
    }

    #[test]
    fn half_overlapping_tiles() {
        let tiles = tile_window(0, 100, 40, 0.5).unwrap();
        let starts: Vec<u64> = tiles.iter().map(|t| t.start).collect();
        assert_eq!(starts, vec![0, 20, 40, 60]);
        assert_eq!(tiles.last().unwrap().end, 100);
    }

    #[test]
    fn short_window_is_one_tile() {
        let tiles = tile_window(0, 30, 50, 0.0).unwrap();
        assert_eq!(tiles, vec![TileWindow { start: 0, end: 30 }]);
    }

    #[test]
    fn tiles_partition_window_without_overlap() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let start = rng.gen_range(0..1000u64);
            let span = rng.gen_range(10..500u64);
            let bases = rng.gen_range(4..50usize);
            let tiles = tile_window(start, start + span, bases, 0.0).unwrap();
            assert_eq!(tiles[0].start, start);
            assert_eq!(tiles.last().unwrap().end, start + span);
            for pair in tiles.windows(2) {
                // No gaps; double coverage only from the shifted last tile.
                assert!(pair[1].start <= pair[0].end);
                let last = pair[1] == *tiles.last().unwrap();
                if !last {
                    assert_eq!(pair[1].start, pair[0].end);
                }
            }
        }
    }

    #[test]
    fn bin_counts_match_known_cases() {
        assert_eq!(bin_count(24, 4), 7);
        assert_eq!(bin_count(85846, 16384), 6);
        assert_eq!(bin_count(10, 1), 11);
    }

    #[test]
    fn final_bin_width_can_be_zero() {
        let problem = problem_from(vec![(0..10).map(|i| i as u32).collect()]);
        let binned = bin_problem(&problem, 1).unwrap();
        assert_eq!(binned.bins(), 11);
        assert_eq!(*binned.widths().last().unwrap(), 0);
        assert_eq!(*binned.totals(0).last().unwrap(), 0);
    }

    #[test]
    fn binning_conserves_totals() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let bases = rng.gen_range(4..200usize);
            let counts: Vec<Vec<u32>> = (0..3)
                .map(|_| (0..bases).map(|_| rng.gen_range(0..50u32)).collect())
                .collect();
            let problem = problem_from(counts.clone());
            for bin_size in 1..=bases + 2 {
                let binned = bin_problem(&problem, bin_size).unwrap();
                assert_eq!(binned.bins(), bin_count(bases, bin_size));
                let width_sum: u64 = binned.widths().iter().sum();
                assert_eq!(width_sum, bases as u64);
                for s in 0..3 {
                    let dense: u64 = counts[s].iter().map(|&c| u64::from(c)).sum();
                    let total: u64 = binned.totals(s).iter().sum();
                    assert_eq!(total, dense);
                }
            }
        }
    }

    #[test]
    fn unit_bins_reconstruct_dense_vector() {
        let counts = vec![vec![3, 0, 5, 2, 9, 9, 0, 1]];
        let problem = problem_from(counts.clone());
        let binned = bin_problem(&problem, 1).unwrap();
        let dense: Vec<u64> = counts[0].iter().map(|&c| u64::from(c)).collect();
        assert_eq!(&binned.totals(0)[..dense.len()], dense.as_slice());
    }

    #[test]
    fn manifest_round_trip() {
        let text = "s1\t/data/s1.bedGraph\tbcell\ns2\t/data/s2.bedGraph\ttcell\n";
        let entries = parse_manifest(text.as_bytes()).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].sample_id, "s1");
        assert_eq!(entries[1].cell_type, "tcell");
    }

    #[test]
    fn manifest_rejects_duplicate_ids() {
        let text = "s1\ta\tx\ns1\tb\ty\n";
        assert!(parse_manifest(text.as_bytes()).is_err());
    }
}
