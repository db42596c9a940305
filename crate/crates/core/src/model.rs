//! Domain types shared by every stage of the pipeline.
//!
//! All geometry lives in the normalized frame: the longest image side maps to
//! [`FRAME_SIZE`] and the aspect ratio is preserved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length of the longest image side after normalization.
pub const FRAME_SIZE: f64 = 256.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Angle of the vector from the origin to this point, in `(-π, π]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Arithmetic mean of a non-empty point set.
pub fn centroid(points: impl IntoIterator<Item = Point2>) -> Point2 {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for p in points {
        sx += p.x;
        sy += p.y;
        n += 1;
    }
    if n == 0 {
        return Point2::default();
    }
    Point2::new(sx / n as f64, sy / n as f64)
}

/// Total length of an open polyline.
pub fn polyline_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Where a chain came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainSource {
    /// Grouped edge contours (contour segment network).
    Csn,
    /// Boundary of a segmented region proposal.
    Region,
    /// User sketch.
    Sketch,
}

impl ChainSource {
    pub fn to_u8(self) -> u8 {
        match self {
            ChainSource::Csn => 0,
            ChainSource::Region => 1,
            ChainSource::Sketch => 2,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(ChainSource::Csn),
            1 => Some(ChainSource::Region),
            2 => Some(ChainSource::Sketch),
            _ => None,
        }
    }
}

/// An ordered polyline of joints in the normalized frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub image_id: String,
    pub chain_id: String,
    pub source: ChainSource,
    joints: Vec<Point2>,
    segment_lengths: Vec<f64>,
}

impl Chain {
    /// Builds a chain, rejecting non-finite joints, fewer than two joints, and
    /// repeated consecutive joints.
    pub fn new(
        image_id: impl Into<String>,
        chain_id: impl Into<String>,
        source: ChainSource,
        joints: Vec<Point2>,
    ) -> Result<Self> {
        if joints.len() < 2 {
            return Err(Error::TooShort {
                joints: joints.len(),
                required: 2,
            });
        }
        if let Some(i) = joints.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("joint {i} is not finite")));
        }
        let segment_lengths: Vec<f64> = joints.windows(2).map(|w| w[0].dist(w[1])).collect();
        if let Some(i) = segment_lengths.iter().position(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::invalid(format!(
                "joints {i} and {} coincide or are too far apart",
                i + 1
            )));
        }
        Ok(Self {
            image_id: image_id.into(),
            chain_id: chain_id.into(),
            source,
            joints,
            segment_lengths,
        })
    }

    pub fn joints(&self) -> &[Point2] {
        &self.joints
    }

    pub fn segment_lengths(&self) -> &[f64] {
        &self.segment_lengths
    }

    pub fn total_length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    /// Number of joints with a segment on either side.
    pub fn interior_joints(&self) -> usize {
        self.joints.len().saturating_sub(2)
    }
}

/// Orientation applied to a descriptor before matching.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipVariant {
    #[default]
    Identity,
    Reversed,
    Mirrored,
    ReversedMirrored,
}

impl FlipVariant {
    pub const ALL: [FlipVariant; 4] = [
        FlipVariant::Identity,
        FlipVariant::Reversed,
        FlipVariant::Mirrored,
        FlipVariant::ReversedMirrored,
    ];

    pub fn is_reversed(self) -> bool {
        matches!(self, FlipVariant::Reversed | FlipVariant::ReversedMirrored)
    }

    pub fn is_mirrored(self) -> bool {
        matches!(self, FlipVariant::Mirrored | FlipVariant::ReversedMirrored)
    }

    /// Maps a joint index of the variant back to the index in the source
    /// descriptor with `len` joints.
    pub fn source_index(self, idx: usize, len: usize) -> usize {
        if self.is_reversed() {
            len - 1 - idx
        } else {
            idx
        }
    }
}

/// Similarity-invariant description of a chain, one entry per interior joint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDescriptor {
    /// Ratio of the incoming to the outgoing segment length.
    pub gammas: Vec<f64>,
    /// Anticlockwise joint angle in `[0, 2π)`; a straight continuation is `π`.
    pub thetas: Vec<f64>,
    /// Penalty weight charged when the joint is skipped during matching.
    pub skip_weights: Vec<f64>,
    /// Joint coordinates in the normalized frame.
    pub points: Vec<Point2>,
    pub total_length: f64,
    pub flip_variant: FlipVariant,
}

impl ChainDescriptor {
    /// Number of interior joints described.
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// Checks the structural invariants; used on untrusted input.
    pub fn validate(&self) -> Result<()> {
        let n = self.gammas.len();
        if n == 0 {
            return Err(Error::TooShort {
                joints: 0,
                required: 1,
            });
        }
        if self.thetas.len() != n || self.skip_weights.len() != n || self.points.len() != n {
            return Err(Error::invalid("descriptor field lengths differ"));
        }
        if !self.gammas.iter().all(|g| g.is_finite() && *g > 0.0) {
            return Err(Error::invalid("segment ratios must be finite and positive"));
        }
        if !self
            .thetas
            .iter()
            .all(|t| t.is_finite() && (0.0..std::f64::consts::TAU).contains(t))
        {
            return Err(Error::invalid("joint angles must lie in [0, 2π)"));
        }
        if !self.skip_weights.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err(Error::invalid("skip weights must be finite and non-negative"));
        }
        if !self.points.iter().all(|p| p.is_finite()) {
            return Err(Error::invalid("joint coordinates must be finite"));
        }
        if !(self.total_length.is_finite() && self.total_length > 0.0) {
            return Err(Error::invalid("total length must be finite and positive"));
        }
        Ok(())
    }

    /// Reconstructs the `len() + 1` segment lengths of the source chain.
    ///
    /// Interior segments come from joint coordinates; the two end segments
    /// follow from the first and last length ratios.
    pub fn segment_lengths(&self) -> Vec<f64> {
        let n = self.len();
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            let after = self.total_length / (1.0 + self.gammas[0]);
            return vec![self.gammas[0] * after, after];
        }
        let mut out = Vec::with_capacity(n + 1);
        let second = self.points[0].dist(self.points[1]);
        out.push(self.gammas[0] * second);
        out.extend(self.points.windows(2).map(|w| w[0].dist(w[1])));
        out.push(out[n - 1] / self.gammas[n - 1]);
        out
    }
}

/// Alignment between two descriptors and its scores.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Matched joint pairs `(index in a, index in the chosen variant of b)`.
    pub pairs: Vec<(usize, usize)>,
    pub skipped_a: Vec<usize>,
    pub skipped_b: Vec<usize>,
    /// Chain matching score from the alignment.
    pub cms: f64,
    /// Global angle consistency of the matched joints.
    pub gac: f64,
    /// `gac * cms`.
    pub score: f64,
    pub variant_used: FlipVariant,
}

/// All chains and descriptors retained for one database image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub chains: Vec<Chain>,
    pub descriptors: Vec<ChainDescriptor>,
}

/// Uniformly rescales points so the longest side of `original_size` maps to
/// [`FRAME_SIZE`].
pub fn normalize_frame(points: &[Point2], original_size: (f64, f64)) -> Result<Vec<Point2>> {
    let (w, h) = original_size;
    if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err(Error::invalid(format!(
            "image size must be positive, got {w}x{h}"
        )));
    }
    // Strokes may run a little past the canvas; anything a whole frame away
    // is a coordinate error.
    if let Some(p) = points.iter().find(|p| !(p.x >= -w && p.x <= 2.0 * w && p.y >= -h && p.y <= 2.0 * h)) {
        return Err(Error::invalid(format!(
            "point ({}, {}) lies far outside the {w}x{h} frame",
            p.x, p.y
        )));
    }
    let scale = FRAME_SIZE / w.max(h);
    Ok(points
        .iter()
        .map(|p| Point2::new(p.x * scale, p.y * scale))
        .collect())
}

/// Upper bound on the summed length of one drawing's normalized polylines.
pub const MAX_ARC_LENGTH: f64 = 1000.0 * FRAME_SIZE;

/// Refuses drawings whose polylines together exceed [`MAX_ARC_LENGTH`].
pub fn check_arc_length(lines: &[Vec<Point2>]) -> Result<()> {
    let total: f64 = lines
        .iter()
        .flat_map(|l| l.windows(2).map(|w| w[0].dist(w[1])))
        .sum();
    if total > MAX_ARC_LENGTH {
        return Err(Error::invalid(format!(
            "drawing is too long: {total:.0} units of outline, the limit is {MAX_ARC_LENGTH:.0}"
        )));
    }
    Ok(())
}

/// Size of the normalized frame for an image of `original_size`.
pub fn normalized_size(original_size: (f64, f64)) -> (f64, f64) {
    let (w, h) = original_size;
    let scale = FRAME_SIZE / w.max(h);
    (w * scale, h * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_points_and_long_drawings_are_refused() {
        assert!(normalize_frame(&[Point2::new(-5.0, 210.0)], (200.0, 200.0)).is_ok());
        assert!(normalize_frame(&[Point2::new(1e12, 5.0)], (200.0, 200.0)).is_err());
        assert!(normalize_frame(&[Point2::new(5.0, -201.0)], (200.0, 200.0)).is_err());
        let zigzag: Vec<Point2> = (0..1100).map(|i| Point2::new(if i % 2 == 0 { 0.0 } else { 256.0 }, 0.0)).collect();
        assert!(check_arc_length(&[zigzag[..900].to_vec()]).is_ok());
        assert!(check_arc_length(&[zigzag[..900].to_vec(), zigzag[..200].to_vec()]).is_err());
    }

    #[test]
    fn normalize_square() {
        let out = normalize_frame(&[Point2::new(512.0, 512.0)], (512.0, 512.0)).unwrap();
        assert_eq!(out, vec![Point2::new(256.0, 256.0)]);
    }

    #[test]
    fn normalize_wide() {
        let out = normalize_frame(&[Point2::new(1024.0, 256.0)], (1024.0, 512.0)).unwrap();
        assert_eq!(out, vec![Point2::new(256.0, 64.0)]);
    }

    #[test]
    fn normalize_identity_and_idempotent() {
        let pts = vec![Point2::new(3.5, 100.25), Point2::new(256.0, 0.0)];
        let once = normalize_frame(&pts, (256.0, 200.0)).unwrap();
        assert_eq!(once, pts);
        let size = normalized_size((800.0, 600.0));
        let a = normalize_frame(&pts, (800.0, 600.0)).unwrap();
        let b = normalize_frame(&a, size).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normalize_rejects_zero_dimension() {
        assert!(matches!(
            normalize_frame(&[], (0.0, 10.0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn chain_segments_match_joints() {
        let c = Chain::new(
            "img",
            "c0",
            ChainSource::Csn,
            vec![[0.0, 0.0].into(), [3.0, 4.0].into(), [3.0, 10.0].into()],
        )
        .unwrap();
        assert_eq!(c.segment_lengths(), &[5.0, 6.0]);
        let rebuilt: Vec<f64> = c.joints().windows(2).map(|w| w[0].dist(w[1])).collect();
        assert_eq!(rebuilt, c.segment_lengths());
        assert_eq!(c.interior_joints(), 1);
    }

    #[test]
    fn chain_rejects_repeated_joint() {
        let r = Chain::new(
            "img",
            "c0",
            ChainSource::Csn,
            vec![[1.0, 1.0].into(), [1.0, 1.0].into()],
        );
        assert!(r.is_err());
        let r = Chain::new("img", "c0", ChainSource::Csn, vec![[1.0, 1.0].into()]);
        assert!(matches!(r, Err(Error::TooShort { .. })));
    }
}
