use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sketchchain_core::corpus::{extract_contours, ingest_corpus_file, ContourRecord, CORPUS_VERSION};
use sketchchain_core::eval::{precision_at_k, EvalReport, QueryPrecision};
use sketchchain_core::extraction::EdgeMask;
use sketchchain_core::index::{build_tree, save_index, TreeStats};
use sketchchain_core::retrieval::{sketch_to_chains, Retriever, SearchMode};
use sketchchain_core::wire::{QueryRequest, QueryResponse};
use sketchchain_core::{Error, Params};

#[derive(Debug, Default, PartialEq, Eq)]
pub struct ExtractSummary {
    pub images: usize,
    pub chains: usize,
    /// `(line, reason)` of input lines that produced nothing.
    pub skipped: Vec<(usize, String)>,
}

/// Reads an 8-bit edge raster; any nonzero pixel is an edge.
pub fn load_edge_raster(path: &Path) -> Result<EdgeMask> {
    let img = image::open(path).with_context(|| format!("reading edge raster {}", path.display()))?;
    let gray = img.to_luma8();
    let (w, h) = gray.dimensions();
    Ok(EdgeMask::new(w as usize, h as usize, gray.into_raw())?)
}

/// Turns a contour JSONL file into a chain corpus JSONL file.
pub fn extract(input: &Path, output: &Path, params: &Params) -> Result<ExtractSummary> {
    let base = input.parent().unwrap_or(Path::new("."));
    let reader = BufReader::new(File::open(input).with_context(|| format!("opening {}", input.display()))?);
    let mut out = BufWriter::new(File::create(output).with_context(|| format!("creating {}", output.display()))?);
    writeln!(out, "{{\"version\":{CORPUS_VERSION}}}")?;
    let mut summary = ExtractSummary::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let result = serde_json::from_str::<ContourRecord>(&line)
            .map_err(anyhow::Error::from)
            .and_then(|rec| {
                let mut contours = rec.to_contours()?;
                if let Some(p) = &rec.edge_mask_image {
                    contours.edge_mask = Some(load_edge_raster(&base.join(p))?);
                }
                Ok(extract_contours(&contours, params)?)
            });
        match result {
            Ok(records) if !records.is_empty() => {
                summary.images += 1;
                summary.chains += records.len();
                for r in &records {
                    serde_json::to_writer(&mut out, r)?;
                    out.write_all(b"\n")?;
                }
            }
            Ok(_) => summary.skipped.push((i + 1, "no chains extracted".into())),
            Err(e) => summary.skipped.push((i + 1, format!("{e:#}"))),
        }
    }
    out.flush()?;
    for (line, reason) in &summary.skipped {
        log::warn!("line {line}: {reason}");
    }
    Ok(summary)
}

/// Index build flags that override the active parameters.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOverrides {
    pub branching: Option<usize>,
    pub max_leaf: Option<usize>,
    pub th_ms: Option<f64>,
}

pub fn build_index(corpus: &Path, output: &Path, seed: u64, mut params: Params, o: BuildOverrides) -> Result<TreeStats> {
    if let Some(b) = o.branching {
        params.index.branching = b;
    }
    if let Some(m) = o.max_leaf {
        params.index.max_leaf = m;
    }
    if let Some(t) = o.th_ms {
        params.index.th_ms = t;
    }
    params.validate()?;
    let report = ingest_corpus_file(corpus, &params).with_context(|| format!("reading corpus {}", corpus.display()))?;
    if report.store.is_empty() {
        bail!("corpus {} holds no usable chains", corpus.display());
    }
    let tree = build_tree(report.store, &params, seed);
    save_index(&tree, output).with_context(|| format!("writing {}", output.display()))?;
    Ok(tree.stats())
}

/// Answers one sketch request against a loaded index.
pub fn answer(retriever: &Retriever, req: &QueryRequest) -> Result<QueryResponse, Error> {
    req.check()?;
    let params = retriever.params();
    let sketch = sketch_to_chains(&req.stroke_points(), (req.frame[0], req.frame[1]), params)?;
    let candidates = req.candidates.unwrap_or(params.retrieval.candidates);
    let ranked = retriever.query(&sketch, req.k, candidates, SearchMode::Tree);
    Ok(QueryResponse::from_ranked(&ranked))
}

pub fn read_request(path: &Path) -> Result<QueryRequest> {
    let bytes = std::fs::read(path).with_context(|| format!("reading sketch {}", path.display()))?;
    Ok(QueryRequest::parse(&bytes)?)
}

/// One labeled evaluation sketch: a request body plus its name and category.
#[derive(Clone, Debug, Deserialize)]
pub struct EvalQuery {
    pub query: String,
    pub category: String,
    pub strokes: Vec<Vec<[f64; 2]>>,
    pub frame: [f64; 2],
}

/// Reads `image_id -> category` from a JSON object.
pub fn read_labels(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading labels {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_eval_queries(path: &Path) -> Result<Vec<EvalQuery>> {
    let reader = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?);
    }
    Ok(out)
}

/// Precision at each level for every query. A query whose sketch is refused
/// scores zero everywhere.
pub fn evaluate(
    retriever: &Retriever,
    queries: &[EvalQuery],
    labels: &HashMap<String, String>,
    levels: &[usize],
) -> Result<EvalReport> {
    let deepest = levels.iter().copied().max().unwrap_or(0);
    if deepest == 0 {
        bail!("no rank levels given");
    }
    let mut rows = Vec::with_capacity(queries.len());
    for q in queries {
        let req = QueryRequest {
            strokes: q.strokes.clone(),
            frame: q.frame,
            k: deepest,
            candidates: None,
        };
        let ranked: Vec<String> = match answer(retriever, &req) {
            Ok(resp) => resp.results.into_iter().map(|r| r.image_id).collect(),
            Err(e @ Error::EmptyQuery { .. }) => {
                log::warn!("query {}: {e}", q.query);
                Vec::new()
            }
            Err(e) => return Err(e).with_context(|| format!("query {}", q.query)),
        };
        let precision: BTreeMap<usize, f64> = levels
            .iter()
            .map(|&k| (k, precision_at_k(&ranked, labels, &q.category, k)))
            .collect();
        rows.push(QueryPrecision {
            query: q.query.clone(),
            category: q.category.clone(),
            precision,
        });
    }
    Ok(EvalReport::new(levels, rows))
}
