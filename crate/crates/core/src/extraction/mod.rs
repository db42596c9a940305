//! Chain extraction: edge contours and region boundaries to a handful of
//! scored chains per image.

mod chains;
mod curvature;
mod graph;
mod regions;
mod trace;

pub use chains::{extract_top_chains, score_chain, ChainScorer, ScoredChain};
pub use curvature::{bend_profile, curvature_split, densify, local_maxima, regularize, resample_uniform};
pub use graph::{build_joint_graph, max_spanning_forest, GraphEdge, JointGraph, SpanningForest, SpanningTree};
pub use regions::{border_fraction, ingest_region_boundaries, perimeter};
pub use trace::{clean_polylines, trace_edge_contours, trace_mask, ContourInput, EdgeMask};

use crate::error::Result;
use crate::model::{check_arc_length, normalize_frame, normalized_size, Chain, ChainSource, Point2};
use crate::params::ExtractionParams;

/// Preprocessed contour data for one database image, in original pixels.
#[derive(Clone, Debug, Default)]
pub struct ImageContours {
    pub image_id: String,
    pub original_size: (f64, f64),
    /// Salient contours as polylines.
    pub polylines: Vec<Vec<Point2>>,
    /// Edge raster covering the whole image, traced before use.
    pub edge_mask: Option<EdgeMask>,
    /// Region proposal boundaries, best first.
    pub regions: Vec<Vec<Point2>>,
}

/// Splits normalized polylines into straight-like segments and chains them
/// through the joint graph's maximum spanning forest.
pub fn chains_from_polylines(polylines: &[Vec<Point2>], params: &ExtractionParams) -> Vec<ScoredChain> {
    let segments: Vec<Vec<Point2>> = polylines
        .iter()
        .flat_map(|line| {
            let regular = regularize(line, params.resample_step);
            curvature_split(&regular, params.scale_m, params.sigma, params.split_threshold)
        })
        .collect();
    chains_from_segments(&segments, params)
}

/// Chains already split segments.
pub fn chains_from_segments(segments: &[Vec<Point2>], params: &ExtractionParams) -> Vec<ScoredChain> {
    let graph = build_joint_graph(segments, params.merge_radius);
    let forest = max_spanning_forest(&graph);
    extract_top_chains(&forest, &graph, params)
}

/// Full per-image extraction: contour chains (`c0..`) then region chains
/// (`r0..`). Chains without an interior joint are dropped since they cannot
/// be described.
pub fn extract_image_chains(input: &ImageContours, params: &ExtractionParams) -> Result<Vec<Chain>> {
    let mut raw = clean_polylines(&input.polylines);
    let mut normalized = Vec::with_capacity(raw.len());
    for line in raw.drain(..) {
        normalized.push(normalize_frame(&line, input.original_size)?);
    }
    if let Some(mask) = &input.edge_mask {
        let mask_size = (mask.width() as f64, mask.height() as f64);
        for line in trace_mask(mask) {
            normalized.push(normalize_frame(&line, mask_size)?);
        }
    }
    check_arc_length(&normalized)?;

    let mut out = Vec::new();
    for (k, sc) in chains_from_polylines(&normalized, params).into_iter().enumerate() {
        if sc.joints.len() < 3 {
            continue;
        }
        if let Ok(chain) = sc.into_chain(&input.image_id, &format!("c{k}"), ChainSource::Csn) {
            out.push(chain);
        }
    }

    let mut regions = Vec::with_capacity(input.regions.len());
    for poly in &input.regions {
        regions.push(normalize_frame(poly, input.original_size)?);
    }
    check_arc_length(&regions)?;
    let frame = normalized_size(input.original_size);
    out.extend(ingest_region_boundaries(&regions, frame, &input.image_id, params));
    Ok(out)
}
