//! JSON request and response bodies of the query service.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point2;
use crate::retrieval::RankedRetrieval;

pub const DEFAULT_K: usize = 10;
pub const MAX_K: usize = 1000;
const MAX_POINTS: usize = 100_000;

fn default_k() -> usize {
    DEFAULT_K
}

/// A sketch in canvas coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    /// Strokes in drawing order, each a list of `[x, y]`.
    pub strokes: Vec<Vec<[f64; 2]>>,
    /// Canvas `[width, height]`.
    pub frame: [f64; 2],
    #[serde(default = "default_k")]
    pub k: usize,
    /// Distinct images gathered from the tree per sketch chain.
    #[serde(default)]
    pub candidates: Option<usize>,
}

impl QueryRequest {
    /// Parses and checks a request body.
    pub fn parse(body: &[u8]) -> Result<Self> {
        let req: QueryRequest = serde_json::from_slice(body)?;
        req.check()?;
        Ok(req)
    }

    pub fn check(&self) -> Result<()> {
        let [w, h] = self.frame;
        if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
            return Err(Error::invalid("frame must be two positive numbers"));
        }
        if self.k == 0 || self.k > MAX_K {
            return Err(Error::invalid(format!("k must lie in 1..={MAX_K}")));
        }
        if self.candidates == Some(0) {
            return Err(Error::invalid("candidates must be at least 1"));
        }
        let total: usize = self.strokes.iter().map(Vec::len).sum();
        if total > MAX_POINTS {
            return Err(Error::invalid(format!("sketch has more than {MAX_POINTS} points")));
        }
        if self.strokes.iter().flatten().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::invalid("stroke points must be finite"));
        }
        Ok(())
    }

    pub fn stroke_points(&self) -> Vec<Vec<Point2>> {
        self.strokes.iter().map(|s| s.iter().map(|&p| p.into()).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairBody {
    pub sketch_chain_id: String,
    pub image_chain_id: String,
    pub matched_sketch_points: Vec<[f64; 2]>,
    pub matched_image_points: Vec<[f64; 2]>,
    pub cs: f64,
    pub gc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultBody {
    pub image_id: String,
    pub score: f64,
    pub pairs: Vec<PairBody>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub results: Vec<ResultBody>,
}

impl QueryResponse {
    pub fn from_ranked(ranked: &[RankedRetrieval]) -> Self {
        let pts = |v: &[Point2]| v.iter().map(|&p| p.into()).collect();
        Self {
            results: ranked
                .iter()
                .map(|r| ResultBody {
                    image_id: r.image_id.clone(),
                    score: r.score,
                    pairs: r
                        .pairs
                        .iter()
                        .map(|p| PairBody {
                            sketch_chain_id: p.sketch_chain_id.clone(),
                            image_chain_id: p.image_chain_id.clone(),
                            matched_sketch_points: pts(&p.sketch_points),
                            matched_image_points: pts(&p.image_points),
                            cs: p.result.score,
                            gc: p.gc,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Machine-readable error body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_checks() {
        let r = QueryRequest::parse(br#"{"strokes":[[[0,0],[1,1]]],"frame":[100,50]}"#).unwrap();
        assert_eq!(r.k, DEFAULT_K);
        assert_eq!(r.candidates, None);
        assert!(QueryRequest::parse(br#"{"strokes":[],"frame":[0,50]}"#).is_err());
        assert!(QueryRequest::parse(br#"{"strokes":[],"frame":[10,50],"k":0}"#).is_err());
        assert!(QueryRequest::parse(br#"{"strokes":[],"frame":[10,50],"extra":1}"#).is_err());
        assert!(QueryRequest::parse(b"[").is_err());
    }
}
