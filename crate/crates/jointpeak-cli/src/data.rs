//! Shared input plumbing: window parsing, sample loading, and parallel tile
//! fitting.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use jointpeak::{
    extract_problem, fit_model_sequence, parse_bedgraph, parse_manifest, tile_window,
    CoverageProfile, CoverageRun, ModelSequence, ProblemMatrix, SampleEntry, TileWindow,
};

/// One genomic window `chrom:start-end`, 0-based half-open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenomeWindow {
    pub chrom: String,
    pub start: u64,
    pub end: u64,
}

impl FromStr for GenomeWindow {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (chrom, range) = s
            .rsplit_once(':')
            .with_context(|| format!("window {s:?} is not chrom:start-end"))?;
        let (start, end) = range
            .split_once('-')
            .with_context(|| format!("window {s:?} is not chrom:start-end"))?;
        let start: u64 = start
            .replace(',', "")
            .parse()
            .with_context(|| format!("bad window start in {s:?}"))?;
        let end: u64 = end
            .replace(',', "")
            .parse()
            .with_context(|| format!("bad window end in {s:?}"))?;
        if chrom.is_empty() || start >= end {
            bail!("empty window {s:?}");
        }
        Ok(GenomeWindow {
            chrom: chrom.to_string(),
            start,
            end,
        })
    }
}

/// Manifest entries plus the parsed coverage of every sample.
pub struct LoadedSamples {
    pub entries: Vec<SampleEntry>,
    coverage: Vec<BTreeMap<String, Vec<CoverageRun>>>,
}

impl LoadedSamples {
    /// Read the manifest and every referenced bedGraph. Relative coverage
    /// paths resolve against the manifest's directory.
    pub fn load(manifest: &Path) -> Result<Self> {
        let reader = BufReader::new(
            File::open(manifest)
                .with_context(|| format!("opening manifest {}", manifest.display()))?,
        );
        let entries = parse_manifest(reader)
            .with_context(|| format!("parsing manifest {}", manifest.display()))?;
        if entries.is_empty() {
            bail!("manifest {} lists no samples", manifest.display());
        }
        let base = manifest.parent().unwrap_or_else(|| Path::new("."));
        let coverage = entries
            .iter()
            .map(|entry| {
                let path = base.join(&entry.path);
                let reader = BufReader::new(File::open(&path).with_context(|| {
                    format!(
                        "opening coverage for sample {} at {}",
                        entry.sample_id,
                        path.display()
                    )
                })?);
                parse_bedgraph(reader).with_context(|| format!("parsing {}", path.display()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LoadedSamples { entries, coverage })
    }

    /// Per-sample profiles on one chromosome; samples without runs there get
    /// an empty profile (all-zero coverage).
    pub fn profiles(&self, chrom: &str) -> Vec<CoverageProfile> {
        self.entries
            .iter()
            .zip(&self.coverage)
            .map(|(entry, coverage)| {
                let runs = coverage.get(chrom).cloned().unwrap_or_default();
                CoverageProfile::new(entry.sample_id.clone(), runs)
                    .expect("parsed runs are sorted and disjoint")
            })
            .collect()
    }
}

/// One tile with its materialized problem and fitted model sequence.
pub struct FittedTile {
    pub tile: TileWindow,
    pub problem: ProblemMatrix,
    pub sequence: ModelSequence,
}

/// Tile the window and fit every tile. Tiles are solved in parallel and
/// returned in genomic order.
pub fn fit_tiles(
    profiles: &[CoverageProfile],
    window: &GenomeWindow,
    bases: usize,
    overlap: f64,
    beta: usize,
) -> Result<Vec<FittedTile>> {
    let tiles = tile_window(window.start, window.end, bases, overlap)?;
    tiles
        .into_par_iter()
        .map(|tile| {
            let problem = extract_problem(profiles, tile.start, tile.bases())?;
            let sequence = fit_model_sequence(&problem, beta)?;
            Ok(FittedTile {
                tile,
                problem,
                sequence,
            })
        })
        .collect()
}
