//! JSONL chain corpora and the contour input format consumed by extraction.
//!
//! A chain corpus holds one JSON object per line:
//! `{"image_id", "chain_id", "source", "points": [[x, y], ...], "original_size": [w, h]}`.
//! An optional first line `{"version": N}` pins the format version.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::descriptor::build_descriptor;
use crate::error::{Error, Result};
use crate::extraction::{EdgeMask, ImageContours};
use crate::index::ChainStore;
use crate::model::{normalize_frame, normalized_size, Chain, ChainSource, Point2};
use crate::params::Params;

pub const CORPUS_VERSION: u32 = 1;

/// One chain as written in a corpus file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub image_id: String,
    pub chain_id: String,
    pub source: ChainSource,
    pub points: Vec<[f64; 2]>,
    pub original_size: [f64; 2],
}

impl ChainRecord {
    /// Record for a chain already in the normalized frame.
    pub fn from_chain(chain: &Chain, frame: (f64, f64)) -> Self {
        Self {
            image_id: chain.image_id.clone(),
            chain_id: chain.chain_id.clone(),
            source: chain.source,
            points: chain.joints().iter().map(|&p| p.into()).collect(),
            original_size: [frame.0, frame.1],
        }
    }

    /// Normalizes and validates the record into a chain.
    pub fn to_chain(&self) -> Result<Chain> {
        let raw: Vec<Point2> = self.points.iter().map(|&p| p.into()).collect();
        let pts = normalize_frame(&raw, (self.original_size[0], self.original_size[1]))?;
        Chain::new(self.image_id.clone(), self.chain_id.clone(), self.source, pts)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    version: u32,
}

/// Parses one corpus line: `Ok(None)` for a version header.
pub fn parse_line(line: &str) -> Result<Option<ChainRecord>> {
    if let Ok(h) = serde_json::from_str::<Header>(line) {
        if h.version != CORPUS_VERSION {
            return Err(Error::VersionMismatch {
                found: h.version,
                expected: CORPUS_VERSION,
            });
        }
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(line)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

/// Outcome of reading a chain corpus.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub store: ChainStore,
    pub skipped: Vec<SkippedLine>,
    pub lines: usize,
}

/// Reads a chain corpus into a store, skipping (and reporting) bad lines.
///
/// Fails only on I/O errors and on a version header other than the supported
/// one. Chains beyond `n_oc + n_gop` for one image are skipped.
pub fn ingest_corpus<R: BufRead>(reader: R, params: &Params) -> Result<IngestReport> {
    let mut report = IngestReport::default();
    let cap = params.extraction.n_oc + params.extraction.n_gop;
    let mut per_image: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let number = i + 1;
        report.lines = number;
        if line.trim().is_empty() {
            continue;
        }
        let record = match parse_line(&line) {
            Ok(Some(r)) => r,
            Ok(None) if number == 1 => continue,
            Ok(None) => {
                report.skipped.push(SkippedLine {
                    line: number,
                    reason: "version header after the first line".into(),
                });
                continue;
            }
            Err(e @ Error::VersionMismatch { .. }) => return Err(e),
            Err(e) => {
                report.skipped.push(SkippedLine {
                    line: number,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let count = per_image.entry(record.image_id.clone()).or_insert(0);
        if *count >= cap {
            report.skipped.push(SkippedLine {
                line: number,
                reason: format!("image {} already has {cap} chains", record.image_id),
            });
            continue;
        }
        let added = record
            .to_chain()
            .and_then(|c| build_descriptor(&c, params.descriptor.lambda_skc))
            .and_then(|d| report.store.push(record.image_id.clone(), record.chain_id.clone(), record.source, d));
        match added {
            Ok(_) => *count += 1,
            Err(e) => report.skipped.push(SkippedLine {
                line: number,
                reason: e.to_string(),
            }),
        }
    }
    if report.store.is_empty() {
        log::warn!("corpus holds no usable chains ({} lines read)", report.lines);
    }
    for s in &report.skipped {
        log::warn!("line {}: skipped: {}", s.line, s.reason);
    }
    Ok(report)
}

pub fn ingest_corpus_file(path: impl AsRef<std::path::Path>, params: &Params) -> Result<IngestReport> {
    let f = std::fs::File::open(path)?;
    ingest_corpus(std::io::BufReader::new(f), params)
}

/// Edge raster written as rows of `'#'` (edge) and `'.'` (background).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub rows: Vec<String>,
}

impl MaskRecord {
    pub fn to_mask(&self) -> Result<EdgeMask> {
        let rows: Vec<&str> = self.rows.iter().map(String::as_str).collect();
        EdgeMask::from_ascii(&rows)
    }
}

/// One image of preprocessed contours: the input line format of `extract`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourRecord {
    pub image_id: String,
    pub original_size: [f64; 2],
    #[serde(default)]
    pub polylines: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub regions: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub edge_mask: Option<MaskRecord>,
    /// Path of an 8-bit single-channel edge raster (nonzero is edge). It is
    /// read by the command-line tool, relative to the input file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_mask_image: Option<String>,
}

fn to_points(lines: &[Vec<[f64; 2]>]) -> Vec<Vec<Point2>> {
    lines.iter().map(|l| l.iter().map(|&p| p.into()).collect()).collect()
}

impl ContourRecord {
    pub fn to_contours(&self) -> Result<ImageContours> {
        Ok(ImageContours {
            image_id: self.image_id.clone(),
            original_size: (self.original_size[0], self.original_size[1]),
            polylines: to_points(&self.polylines),
            regions: to_points(&self.regions),
            edge_mask: self.edge_mask.as_ref().map(MaskRecord::to_mask).transpose()?,
        })
    }
}

/// Runs extraction for one contour line and returns the corpus records.
pub fn extract_record(record: &ContourRecord, params: &Params) -> Result<Vec<ChainRecord>> {
    extract_contours(&record.to_contours()?, params)
}

/// Runs extraction for one image and returns the corpus records.
pub fn extract_contours(contours: &ImageContours, params: &Params) -> Result<Vec<ChainRecord>> {
    let chains = crate::extraction::extract_image_chains(contours, &params.extraction)?;
    let frame = normalized_size(contours.original_size);
    Ok(chains.iter().map(|c| ChainRecord::from_chain(c, frame)).collect())
}
