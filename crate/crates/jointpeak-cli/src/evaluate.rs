//! `evaluate`: score BED predictions against labeled regions, one CSV row per
//! region plus an aggregate row.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use jointpeak::{parse_labels, region_error};

use crate::output_writer;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Peak predictions in BED form: chrom, start, end, sampleList (tab-separated).
    #[arg(long)]
    pub predictions: PathBuf,
    /// Tab-separated labels file: chrom, start, end, annotation, sampleId.
    #[arg(long)]
    pub labels: PathBuf,
    /// Output path for the error CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

type PeaksBySample = BTreeMap<(String, String), Vec<(u64, u64)>>;

/// Parse peak predictions; the fourth column lists comma-separated samples
/// sharing the peak.
fn parse_predictions(reader: impl BufRead) -> Result<PeaksBySample> {
    let mut peaks: PeaksBySample = BTreeMap::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let trimmed = line.trim_end();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 4 {
            bail!(
                "predictions line {line_no}: expected 4 fields, got {}",
                fields.len()
            );
        }
        let start: u64 = fields[1]
            .parse()
            .with_context(|| format!("predictions line {line_no}: bad start"))?;
        let end: u64 = fields[2]
            .parse()
            .with_context(|| format!("predictions line {line_no}: bad end"))?;
        if start >= end {
            bail!("predictions line {line_no}: empty peak [{start}, {end})");
        }
        for sample in fields[3].split(',').filter(|s| !s.is_empty()) {
            peaks
                .entry((sample.to_string(), fields[0].to_string()))
                .or_default()
                .push((start, end));
        }
    }
    for list in peaks.values_mut() {
        list.sort_unstable();
        // Overlapping calls for one sample (from overlapping tiles) merge
        // into their union.
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(list.len());
        for &(start, end) in list.iter() {
            match merged.last_mut() {
                Some(last) if start <= last.1 => last.1 = last.1.max(end),
                _ => merged.push((start, end)),
            }
        }
        *list = merged;
    }
    Ok(peaks)
}

pub fn run_evaluate(args: &EvaluateArgs) -> Result<()> {
    let predictions = parse_predictions(BufReader::new(
        File::open(&args.predictions)
            .with_context(|| format!("opening predictions {}", args.predictions.display()))?,
    ))?;
    let regions = parse_labels(BufReader::new(
        File::open(&args.labels)
            .with_context(|| format!("opening labels {}", args.labels.display()))?,
    ))?;

    let empty: Vec<(u64, u64)> = Vec::new();
    let mut out = output_writer(args.out.as_deref())?;
    writeln!(out, "sampleId,region,annotation,fp,fn")?;
    let mut total_fp = 0u32;
    let mut total_fn = 0u32;
    for region in &regions {
        let peaks = predictions
            .get(&(region.sample_id.clone(), region.chrom.clone()))
            .unwrap_or(&empty);
        let (fp, fn_) = region_error(region, peaks);
        total_fp += fp;
        total_fn += fn_;
        writeln!(
            out,
            "{},{}:{}-{},{},{},{}",
            region.sample_id,
            region.chrom,
            region.start,
            region.end,
            region.annotation.as_str(),
            fp,
            fn_
        )?;
    }
    writeln!(out, "total,all,,{total_fp},{total_fn}")?;
    out.flush()?;
    Ok(())
}
