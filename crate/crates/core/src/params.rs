//! The parameter ledger: every tunable constant of the pipeline in one place.
//!
//! Ledgers are read from TOML. Missing keys take their defaults, unknown keys
//! are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chain extraction from polylines, region boundaries and sketches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionParams {
    /// Points on either side of a sample used by the bend detector.
    pub scale_m: usize,
    /// Standard deviation (in samples) of the bend detector's weights.
    pub sigma: f64,
    /// Minimum weighted deviation from a straight angle to split at, radians.
    pub split_threshold: f64,
    /// Endpoints closer than this are merged into one joint.
    pub merge_radius: f64,
    pub lambda_l: f64,
    pub lambda_s: f64,
    /// Chains kept per image from the contour network.
    pub n_oc: usize,
    /// Maximum relative overlap between selected chains.
    pub overlap_threshold: f64,
    /// Region proposals considered per image.
    pub n_gop: usize,
    /// Distance to the frame edge under which a boundary counts as touching it.
    pub border_margin: f64,
    /// Region boundaries shorter than this are discarded.
    pub min_perimeter: f64,
    /// Arc-length spacing used when resampling polylines and strokes.
    pub resample_step: f64,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        Self {
            scale_m: 5,
            sigma: 2.0,
            split_threshold: 0.4,
            merge_radius: 3.0,
            lambda_l: 1.0,
            lambda_s: 2.0,
            n_oc: 5,
            overlap_threshold: 0.6,
            n_gop: 20,
            border_margin: 3.0,
            min_perimeter: 40.0,
            resample_step: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescriptorParams {
    /// Weight of the segment-length part of the skip penalty.
    pub lambda_skc: f64,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        Self { lambda_skc: 0.5 }
    }
}

/// Constants of the joint score, skip penalties and angle consistency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchParams {
    pub lambda_lr: f64,
    pub lambda_ang: f64,
    /// Skip penalty scale for joints of a sketch chain.
    pub alpha_sketch: f64,
    /// Skip penalty scale for joints of an image chain.
    pub alpha_image: f64,
    pub lambda_ac: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            lambda_lr: 0.5,
            lambda_ang: 2.0,
            alpha_sketch: 0.07,
            alpha_image: 0.03,
            lambda_ac: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexParams {
    pub branching: usize,
    pub max_leaf: usize,
    /// A chain joins every medoid scoring at least this fraction of its best.
    pub th_ms: f64,
    /// Recursion stops at this depth regardless of cluster size.
    pub max_depth: usize,
    /// A child cluster holding more than this fraction of its parent's
    /// chains becomes a leaf instead of being split again.
    pub shrink_ratio: f64,
    /// Medoid refinement rounds after seeding; 0 keeps the seeded medoids.
    pub refine_iterations: usize,
}

impl Default for IndexParams {
    fn default() -> Self {
        Self {
            branching: 32,
            max_leaf: 100,
            th_ms: 0.8,
            max_depth: 8,
            shrink_ratio: 0.5,
            refine_iterations: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalParams {
    /// Sketch chains with fewer interior joints are dropped.
    pub th_nj: usize,
    /// Chain pairs scoring below this are not kept for verification.
    pub cs_floor: f64,
    pub lambda_c: f64,
    pub lambda_a: f64,
    /// Distinct images gathered from the tree per sketch chain.
    pub candidates: usize,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        Self {
            th_nj: 5,
            cs_floor: 0.5,
            lambda_c: 1.0,
            lambda_a: 2.0,
            candidates: 1500,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub extraction: ExtractionParams,
    pub descriptor: DescriptorParams,
    pub matching: MatchParams,
    pub index: IndexParams,
    pub retrieval: RetrievalParams,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
    }
}

fn fraction(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must lie in (0, 1], got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be at least {min}, got {v}")))
    }
}

impl Params {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let params: Params = toml::from_str(s)?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("parameter ledger serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.extraction;
        at_least("extraction.scale_m", e.scale_m, 1)?;
        positive("extraction.sigma", e.sigma)?;
        positive("extraction.split_threshold", e.split_threshold)?;
        positive("extraction.merge_radius", e.merge_radius)?;
        positive("extraction.lambda_l", e.lambda_l)?;
        positive("extraction.lambda_s", e.lambda_s)?;
        at_least("extraction.n_oc", e.n_oc, 1)?;
        if !(e.overlap_threshold > 0.0 && e.overlap_threshold < 1.0) {
            return Err(Error::InvalidParams(format!(
                "extraction.overlap_threshold must lie in (0, 1), got {}",
                e.overlap_threshold
            )));
        }
        positive("extraction.border_margin", e.border_margin)?;
        positive("extraction.min_perimeter", e.min_perimeter)?;
        positive("extraction.resample_step", e.resample_step)?;

        positive("descriptor.lambda_skc", self.descriptor.lambda_skc)?;

        let m = &self.matching;
        positive("matching.lambda_lr", m.lambda_lr)?;
        positive("matching.lambda_ang", m.lambda_ang)?;
        positive("matching.alpha_sketch", m.alpha_sketch)?;
        positive("matching.alpha_image", m.alpha_image)?;
        positive("matching.lambda_ac", m.lambda_ac)?;

        let i = &self.index;
        at_least("index.branching", i.branching, 2)?;
        at_least("index.max_leaf", i.max_leaf, 1)?;
        fraction("index.th_ms", i.th_ms)?;
        at_least("index.max_depth", i.max_depth, 1)?;
        fraction("index.shrink_ratio", i.shrink_ratio)?;

        let r = &self.retrieval;
        at_least("retrieval.th_nj", r.th_nj, 1)?;
        if !(r.cs_floor.is_finite() && r.cs_floor >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "retrieval.cs_floor must be non-negative, got {}",
                r.cs_floor
            )));
        }
        positive("retrieval.lambda_c", r.lambda_c)?;
        positive("retrieval.lambda_a", r.lambda_a)?;
        at_least("retrieval.candidates", r.candidates, 1)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let p = Params::default();
        p.validate().unwrap();
        let back = Params::from_toml_str(&p.to_toml_string()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn partial_override() {
        let p = Params::from_toml_str("[matching]\nlambda_ac = 3.5\n[index]\nbranching = 8\n").unwrap();
        assert_eq!(p.matching.lambda_ac, 3.5);
        assert_eq!(p.index.branching, 8);
        assert_eq!(p.matching.lambda_lr, 0.5);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(Params::from_toml_str("[matching]\nlamda_ac = 1.0\n").is_err());
        assert!(matches!(
            Params::from_toml_str("[index]\nth_ms = 1.5\n"),
            Err(Error::InvalidParams(_))
        ));
        assert!(Params::from_toml_str("[matching]\nalpha_image = -0.1\n").is_err());
    }
}
