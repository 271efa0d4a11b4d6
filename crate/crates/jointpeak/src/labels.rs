//! Annotated region labels and the annotation error of peak predictions.
//!
//! Error rules, one per annotation (at most one error per region):
//!
//! | annotation  | false positive        | false negative      |
//! |-------------|-----------------------|---------------------|
//! | `noPeaks`   | any overlapping peak  | never               |
//! | `peaks`     | never                 | no overlapping peak |
//! | `peakStart` | >= 2 starts in region | no start in region  |
//! | `peakEnd`   | >= 2 ends in region   | no end in region    |
//!
//! Overlap means non-empty intersection of half-open intervals; a peak's
//! start and end positions are its half-open coordinates.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Annotation {
    NoPeaks,
    Peaks,
    PeakStart,
    PeakEnd,
}

impl FromStr for Annotation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noPeaks" => Ok(Annotation::NoPeaks),
            "peaks" => Ok(Annotation::Peaks),
            "peakStart" => Ok(Annotation::PeakStart),
            "peakEnd" => Ok(Annotation::PeakEnd),
            other => Err(Error::invalid_input(format!(
                "unknown annotation {other:?}"
            ))),
        }
    }
}

impl Annotation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Annotation::NoPeaks => "noPeaks",
            Annotation::Peaks => "peaks",
            Annotation::PeakStart => "peakStart",
            Annotation::PeakEnd => "peakEnd",
        }
    }
}

/// One labeled region for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LabeledRegion {
    pub chrom: String,
    pub start: u64,
    pub end: u64,
    pub annotation: Annotation,
    pub sample_id: String,
}

/// Aggregated annotation errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorCount {
    pub false_positives: u32,
    pub false_negatives: u32,
    /// Regions evaluated.
    pub regions: u32,
}

impl ErrorCount {
    pub fn total(&self) -> u32 {
        self.false_positives + self.false_negatives
    }
}

/// Parse a labels file: `chrom<TAB>start<TAB>end<TAB>annotation<TAB>sampleId`.
pub fn parse_labels<R: BufRead>(reader: R) -> Result<Vec<LabeledRegion>> {
    let mut regions = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let trimmed = line.trim_end();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                line_no,
                format!("expected 5 tab-separated fields, got {}", fields.len()),
            ));
        }
        let start: u64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad start {:?}", fields[1])))?;
        let end: u64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad end {:?}", fields[2])))?;
        if start >= end {
            return Err(Error::parse(
                line_no,
                format!("empty region [{start}, {end})"),
            ));
        }
        let annotation = fields[3]
            .parse()
            .map_err(|e| Error::parse(line_no, format!("{e}")))?;
        regions.push(LabeledRegion {
            chrom: fields[0].to_string(),
            start,
            end,
            annotation,
            sample_id: fields[4].to_string(),
        });
    }
    Ok(regions)
}

fn overlaps(region: &LabeledRegion, peak: &(u64, u64)) -> bool {
    peak.0 < region.end && region.start < peak.1
}

/// Error of one region against that sample's sorted, disjoint peaks.
///
/// Returns `(false positives, false negatives)`, each 0 or 1, never both 1.
pub fn region_error(region: &LabeledRegion, peaks: &[(u64, u64)]) -> (u32, u32) {
    match region.annotation {
        Annotation::NoPeaks => {
            let fp = peaks.iter().any(|p| overlaps(region, p));
            (u32::from(fp), 0)
        }
        Annotation::Peaks => {
            let found = peaks.iter().any(|p| overlaps(region, p));
            (0, u32::from(!found))
        }
        Annotation::PeakStart => {
            let starts = peaks
                .iter()
                .filter(|p| region.start <= p.0 && p.0 < region.end)
                .count();
            (u32::from(starts >= 2), u32::from(starts == 0))
        }
        Annotation::PeakEnd => {
            let ends = peaks
                .iter()
                .filter(|p| region.start <= p.1 && p.1 < region.end)
                .count();
            (u32::from(ends >= 2), u32::from(ends == 0))
        }
    }
}

/// Sum region errors over a whole label set.
///
/// `predictions` must contain a (possibly empty) peak list for every labeled
/// sample.
pub fn total_error(
    regions: &[LabeledRegion],
    predictions: &BTreeMap<String, Vec<(u64, u64)>>,
) -> Result<ErrorCount> {
    let mut count = ErrorCount::default();
    for region in regions {
        let peaks = predictions
            .get(&region.sample_id)
            .ok_or_else(|| Error::MissingSample(region.sample_id.clone()))?;
        let (fp, fn_) = region_error(region, peaks);
        count.false_positives += fp;
        count.false_negatives += fn_;
        count.regions += 1;
    }
    Ok(count)
}

/// Label error of every model in a fitted sequence.
///
/// The models' peak positions are problem-local, so the window start and the
/// problem's sample ids translate them to genomic coordinates. Entries are
/// `None` where the sequence has no feasible model; those are excluded from
/// target-interval computation downstream.
pub fn errors_by_model_size(
    sequence: &ModelSequence,
    window_start: u64,
    sample_ids: &[String],
    regions: &[LabeledRegion],
) -> Result<Vec<Option<ErrorCount>>> {
    sequence
        .models
        .iter()
        .map(|model| {
            let Some(model) = model else { return Ok(None) };
            let mut predictions: BTreeMap<String, Vec<(u64, u64)>> = sample_ids
                .iter()
                .map(|id| (id.clone(), Vec::new()))
                .collect();
            if let Some(peak) = model.peak {
                let genomic = (
                    window_start + peak.first_change as u64,
                    window_start + peak.last_change as u64,
                );
                for (s, fit) in model.fits.iter().enumerate() {
                    if fit.has_peak {
                        predictions
                            .get_mut(&sample_ids[s])
                            .expect("sample ids cover all fits")
                            .push(genomic);
                    }
                }
            }
            total_error(regions, &predictions).map(Some)
        })
        .collect()
}
