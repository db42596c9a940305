//! Sketch queries: chain extraction from strokes, candidate gathering from the
//! index, chain pair completion, geometric verification and ranking.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::descriptor::{build_descriptor, mirror_point};
use crate::error::{Error, Result};
use crate::extraction::{chains_from_segments, clean_polylines, curvature_split, resample_uniform};
use crate::index::{exhaustive_scan, ChainStore, ChainTree, ScoreCache};
use crate::matcher::{chain_score_prepared, chain_similarity_prepared, SkipCosts};
use crate::model::{centroid, check_arc_length, normalize_frame, Chain, ChainDescriptor, ChainSource, MatchResult, Point2};
use crate::params::{Params, RetrievalParams};

/// Chains and descriptors of one sketch, in the normalized frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchQuery {
    pub strokes: Vec<Vec<Point2>>,
    pub chains: Vec<Chain>,
    pub descriptors: Vec<ChainDescriptor>,
}

impl SketchQuery {
    /// Wraps ready-made chains, dropping none.
    pub fn from_chains(chains: Vec<Chain>, lambda_skc: f64) -> Result<Self> {
        let descriptors = chains
            .iter()
            .map(|c| build_descriptor(c, lambda_skc))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            strokes: Vec::new(),
            chains,
            descriptors,
        })
    }
}

/// Breaks strokes at turns, joins strokes that meet, and keeps the chains
/// with at least `th_nj` interior joints.
///
/// `frame` is the drawing canvas size; strokes are normalized like images.
pub fn sketch_to_chains(strokes: &[Vec<Point2>], frame: (f64, f64), params: &Params) -> Result<SketchQuery> {
    let mut normalized = Vec::with_capacity(strokes.len());
    for s in clean_polylines(strokes) {
        normalized.push(normalize_frame(&s, frame)?);
    }
    check_arc_length(&normalized)?;
    if normalized.is_empty() {
        return Err(Error::EmptyQuery {
            code: "no_strokes",
            message: "the sketch has no stroke with two distinct points".into(),
        });
    }
    let ep = &params.extraction;
    let segments: Vec<Vec<Point2>> = normalized
        .iter()
        .flat_map(|s| {
            let even = resample_uniform(s, ep.resample_step);
            curvature_split(&even, ep.scale_m, ep.sigma, ep.split_threshold)
        })
        .collect();
    let mut chains = Vec::new();
    let mut descriptors = Vec::new();
    for sc in chains_from_segments(&segments, ep) {
        if sc.joints.len() < params.retrieval.th_nj + 2 {
            continue;
        }
        let id = format!("s{}", chains.len());
        let Ok(chain) = sc.into_chain("sketch", &id, ChainSource::Sketch) else {
            continue;
        };
        descriptors.push(build_descriptor(&chain, params.descriptor.lambda_skc)?);
        chains.push(chain);
    }
    if chains.is_empty() {
        return Err(Error::EmptyQuery {
            code: "too_simple",
            message: format!(
                "no part of the sketch has {} or more turns; add detail",
                params.retrieval.th_nj
            ),
        });
    }
    Ok(SketchQuery {
        strokes: normalized,
        chains,
        descriptors,
    })
}

/// A matched sketch chain and image chain with the geometry used for
/// verification.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchedPair {
    /// Index into the sketch's chains.
    pub sketch_chain: usize,
    /// Store index of the image chain.
    pub image_chain: u32,
    pub sketch_chain_id: String,
    pub image_chain_id: String,
    pub result: MatchResult,
    /// Matched sketch joints, in match order.
    pub sketch_points: Vec<Point2>,
    /// Image joints matched to `sketch_points`, in image coordinates.
    pub image_points: Vec<Point2>,
    pub sketch_centroid: Point2,
    pub image_centroid: Point2,
    pub matched_length_sketch: f64,
    pub matched_length_image: f64,
    /// Geometric consistency with the other pairs of the image.
    pub gc: f64,
}

/// Length of the chain stretch from the segment entering joint `first` to the
/// segment leaving joint `last`.
fn span_length(d: &ChainDescriptor, first: usize, last: usize) -> f64 {
    let segs = d.segment_lengths();
    segs[first..=last + 1].iter().sum()
}

/// Builds the verification geometry of one match of sketch chain `sketch`
/// against the image descriptor `image` (identity orientation).
pub fn matched_pair(
    sketch_chain: usize,
    sketch: &ChainDescriptor,
    sketch_chain_id: &str,
    image_chain: u32,
    image: &ChainDescriptor,
    image_chain_id: &str,
    result: MatchResult,
) -> MatchedPair {
    let n_img = image.len();
    let v = result.variant_used;
    let sketch_points: Vec<Point2> = result.pairs.iter().map(|&(i, _)| sketch.points[i]).collect();
    let src: Vec<usize> = result.pairs.iter().map(|&(_, j)| v.source_index(j, n_img)).collect();
    let image_points: Vec<Point2> = src.iter().map(|&j| image.points[j]).collect();
    let (lo_s, hi_s) = match (result.pairs.first(), result.pairs.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => (0, 0),
    };
    let lo_i = src.iter().copied().min().unwrap_or(0);
    let hi_i = src.iter().copied().max().unwrap_or(0);
    MatchedPair {
        sketch_chain,
        image_chain,
        sketch_chain_id: sketch_chain_id.to_string(),
        image_chain_id: image_chain_id.to_string(),
        sketch_centroid: centroid(sketch_points.iter().copied()),
        image_centroid: centroid(image_points.iter().copied()),
        matched_length_sketch: span_length(sketch, lo_s, hi_s),
        matched_length_image: span_length(image, lo_i, hi_i),
        sketch_points,
        image_points,
        result,
        gc: 1.0,
    }
}

/// Scores every sketch chain against every chain of one image and keeps a
/// one-to-one set of pairs: highest chain score first, pairs below
/// `cs_floor` dropped.
pub fn complete_pair_matching(
    sketch: &SketchQuery,
    store: &ChainStore,
    image_chains: &[u32],
    params: &Params,
) -> Vec<MatchedPair> {
    complete_pair_matching_cached(sketch, store, image_chains, params, &[])
}

/// [`complete_pair_matching`] reusing chain scores already known for each
/// sketch chain (`caches[s]` for sketch chain `s`). Only the kept pairs are
/// aligned again.
pub fn complete_pair_matching_cached(
    sketch: &SketchQuery,
    store: &ChainStore,
    image_chains: &[u32],
    params: &Params,
    caches: &[ScoreCache],
) -> Vec<MatchedPair> {
    let costs = SkipCosts::new(true, &params.matching);
    let mut scored: Vec<(f64, usize, usize)> = Vec::new();
    for (s, sd) in sketch.descriptors.iter().enumerate() {
        let cache = caches.get(s);
        for (k, &c) in image_chains.iter().enumerate() {
            let score = cache.and_then(|m| m.get(&c).copied()).unwrap_or_else(|| {
                chain_score_prepared(sd, &store.get(c).descriptor, costs, &params.matching)
            });
            // A zero score means nothing aligned.
            if score >= params.retrieval.cs_floor && score > 0.0 {
                scored.push((score, s, k));
            }
        }
    }
    greedy_one_to_one(&scored)
        .into_iter()
        .map(|p| {
            let (_, s, k) = scored[p];
            let c = image_chains[k];
            let stored = store.get(c);
            let result = chain_similarity_prepared(&sketch.descriptors[s], &stored.descriptor, costs, &params.matching);
            matched_pair(
                s,
                &sketch.descriptors[s],
                &sketch.chains[s].chain_id,
                c,
                stored.descriptor.base(),
                &stored.chain_id,
                result,
            )
        })
        .collect()
}

/// Picks `(score, left, right)` candidates in descending score order (ties
/// by left then right index), skipping any whose left or right is taken.
/// Returns positions into `candidates`.
pub fn greedy_one_to_one(candidates: &[(f64, usize, usize)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&candidates[a], &candidates[b]);
        y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
    });
    let mut used_left = BTreeSet::new();
    let mut used_right = BTreeSet::new();
    let mut out = Vec::new();
    for p in order {
        let (_, l, r) = candidates[p];
        if used_left.contains(&l) || used_right.contains(&r) {
            continue;
        }
        used_left.insert(l);
        used_right.insert(r);
        out.push(p);
    }
    out
}

/// Pair geometry as seen by verification, with the sketch side optionally
/// mirrored.
#[derive(Clone, Debug)]
pub struct PairGeometry {
    pub sketch_points: Vec<Point2>,
    pub image_points: Vec<Point2>,
    pub sketch_centroid: Point2,
    pub image_centroid: Point2,
    pub sketch_length: f64,
    pub image_length: f64,
}

impl PairGeometry {
    pub fn of(p: &MatchedPair, mirror_sketch: bool) -> Self {
        let m = |q: Point2| if mirror_sketch { mirror_point(q) } else { q };
        Self {
            sketch_points: p.sketch_points.iter().map(|&q| m(q)).collect(),
            image_points: p.image_points.clone(),
            sketch_centroid: m(p.sketch_centroid),
            image_centroid: p.image_centroid,
            sketch_length: p.matched_length_sketch,
            image_length: p.matched_length_image,
        }
    }
}

fn omega(a: f64, b: f64) -> f64 {
    let (a, b) = (a.max(1e-9), b.max(1e-9));
    a.min(b) / a.max(b)
}

/// Agreement of the centroid distance between two pairs in the sketch and in
/// the image, each relative to the summed matched lengths.
pub fn pair_distance_consistency(p: &PairGeometry, q: &PairGeometry, lambda_c: f64) -> f64 {
    let ls = p.sketch_length + q.sketch_length;
    let li = p.image_length + q.image_length;
    let ds = p.sketch_centroid.dist(q.sketch_centroid) / ls;
    let di = p.image_centroid.dist(q.image_centroid) / li;
    (-lambda_c * (1.0 - omega(ds, di))).exp()
}

fn relative_angle(joint: Point2, c: Point2, axis: f64) -> Option<f64> {
    let v = joint.sub(c);
    if v.norm() == 0.0 {
        None
    } else {
        Some(v.angle() - axis)
    }
}

fn circular(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Agreement of `p`'s joint directions measured from its centroid relative
/// to the axis towards `q`'s centroid, compared between sketch and image.
pub fn pair_angular_consistency(p: &PairGeometry, q: &PairGeometry, lambda_a: f64) -> f64 {
    let n = p.sketch_points.len().min(p.image_points.len());
    if n == 0 {
        return 1.0;
    }
    let axis_s = q.sketch_centroid.sub(p.sketch_centroid).angle();
    let axis_i = q.image_centroid.sub(p.image_centroid).angle();
    let total: f64 = (0..n)
        .map(|k| {
            match (
                relative_angle(p.sketch_points[k], p.sketch_centroid, axis_s),
                relative_angle(p.image_points[k], p.image_centroid, axis_i),
            ) {
                (Some(a), Some(b)) => circular(a, b),
                _ => 0.0,
            }
        })
        .sum();
    (-lambda_a * total / n as f64).exp()
}

/// Whether most pairs matched a mirrored orientation of the image chain.
fn mostly_mirrored(pairs: &[MatchedPair]) -> bool {
    let m = pairs.iter().filter(|p| p.result.variant_used.is_mirrored()).count();
    2 * m > pairs.len()
}

/// Geometric consistency of every pair against the other pairs of the same
/// image; 1 for a lone pair.
pub fn geometric_consistency(pairs: &[MatchedPair], params: &RetrievalParams) -> Vec<f64> {
    if pairs.len() < 2 {
        return vec![1.0; pairs.len()];
    }
    let mirror = mostly_mirrored(pairs);
    let geo: Vec<PairGeometry> = pairs.iter().map(|p| PairGeometry::of(p, mirror)).collect();
    (0..geo.len())
        .map(|a| {
            (0..geo.len())
                .filter(|&b| b != a)
                .map(|b| {
                    pair_distance_consistency(&geo[a], &geo[b], params.lambda_c)
                        * pair_angular_consistency(&geo[a], &geo[b], params.lambda_a)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// One ranked database image.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedRetrieval {
    pub image_id: String,
    pub pairs: Vec<MatchedPair>,
    pub score: f64,
}

/// Weights each pair's chain score by its geometric consistency, sums per
/// image and sorts by descending score, ties by image id. Images without
/// pairs are left out.
pub fn rank_images(candidates: Vec<(String, Vec<MatchedPair>)>, params: &RetrievalParams) -> Vec<RankedRetrieval> {
    let mut out: Vec<RankedRetrieval> = candidates
        .into_iter()
        .filter(|(_, pairs)| !pairs.is_empty())
        .map(|(image_id, mut pairs)| {
            let gc = geometric_consistency(&pairs, params);
            let mut score = 0.0;
            for (p, g) in pairs.iter_mut().zip(gc) {
                p.gc = g;
                score += g * p.result.score;
            }
            RankedRetrieval {
                image_id,
                pairs,
                score,
            }
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.image_id.cmp(&b.image_id)));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Best-first search through the k-medoids tree.
    Tree,
    /// Every image in the store is verified.
    Exhaustive,
}

/// Answers sketch queries against a built index.
pub struct Retriever {
    tree: ChainTree,
    params: Params,
    images: Vec<(String, Vec<u32>)>,
    image_pos: std::collections::HashMap<String, usize>,
}

impl Retriever {
    /// Uses the parameters the index was built with.
    pub fn new(tree: ChainTree) -> Self {
        let params = tree.params.clone();
        Self::with_params(tree, params)
    }

    /// Overrides matching and ranking parameters; the tree stays as built.
    pub fn with_params(tree: ChainTree, params: Params) -> Self {
        let images = tree.store.by_image();
        let image_pos = images.iter().enumerate().map(|(i, (id, _))| (id.clone(), i)).collect();
        Self {
            tree,
            params,
            images,
            image_pos,
        }
    }

    pub fn tree(&self) -> &ChainTree {
        &self.tree
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Positions of the images to verify for `sketch`, with the chain scores
    /// the tree search computed for each sketch chain.
    fn shortlist(&self, sketch: &SketchQuery, candidates: usize, mode: SearchMode) -> (Vec<usize>, Vec<ScoreCache>) {
        let costs = SkipCosts::new(true, &self.params.matching);
        match mode {
            SearchMode::Exhaustive => ((0..self.images.len()).collect(), Vec::new()),
            SearchMode::Tree => {
                let mut set = BTreeSet::new();
                let mut caches = Vec::with_capacity(sketch.descriptors.len());
                for d in &sketch.descriptors {
                    let mut cache = ScoreCache::new();
                    for hit in self.tree.search_cached(d, candidates, costs, &mut cache) {
                        set.insert(self.image_pos[&hit.image_id]);
                    }
                    caches.push(cache);
                }
                (set.into_iter().collect(), caches)
            }
        }
    }

    /// Ranks images for `sketch`, returning at most `k`.
    pub fn query(&self, sketch: &SketchQuery, k: usize, candidates: usize, mode: SearchMode) -> Vec<RankedRetrieval> {
        let (shortlist, mut caches) = self.shortlist(sketch, candidates, mode);
        // The tree scores with its own matching parameters.
        if self.tree.match_params() != &self.params.matching {
            caches.clear();
        }
        let verified: Vec<(String, Vec<MatchedPair>)> = shortlist
            .par_iter()
            .map(|&i| {
                let (id, chains) = &self.images[i];
                let pairs = complete_pair_matching_cached(sketch, &self.tree.store, chains, &self.params, &caches);
                (id.clone(), pairs)
            })
            .collect();
        let mut ranked = rank_images(verified, &self.params.retrieval);
        ranked.truncate(k);
        ranked
    }

    /// Best chain score per image for a single descriptor, by linear scan.
    pub fn scan(&self, query: &ChainDescriptor) -> Vec<crate::index::SearchHit> {
        exhaustive_scan(&self.tree.store, query, SkipCosts::new(true, &self.params.matching), &self.params.matching)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::descriptor_from_points;
    use crate::model::FlipVariant;

    fn zigzag(segments: usize, origin: Point2, seg: f64) -> Vec<Point2> {
        (0..=segments)
            .map(|i| {
                let y = if i % 2 == 0 { 0.0 } else { seg * 0.7 };
                Point2::new(origin.x + i as f64 * seg * 0.7, origin.y + y)
            })
            .collect()
    }

    #[test]
    fn zigzag_needs_five_turns() {
        let p = Params::default();
        let frame = (256.0, 256.0);
        let err = sketch_to_chains(&[zigzag(5, Point2::new(20.0, 100.0), 40.0)], frame, &p).unwrap_err();
        assert!(matches!(err, Error::EmptyQuery { code: "too_simple", .. }));
        let q = sketch_to_chains(&[zigzag(6, Point2::new(20.0, 100.0), 40.0)], frame, &p).unwrap();
        assert_eq!(q.chains.len(), 1);
        assert_eq!(q.chains[0].interior_joints(), 5);
        assert_eq!(q.descriptors[0].len(), 5);
    }

    #[test]
    fn strokes_sharing_an_endpoint_merge() {
        let p = Params::default();
        let full = zigzag(6, Point2::new(20.0, 100.0), 40.0);
        let first = full[..4].to_vec();
        let second = full[3..].to_vec();
        let q = sketch_to_chains(&[first, second], (256.0, 256.0), &p).unwrap();
        assert_eq!(q.chains.len(), 1);
        assert_eq!(q.chains[0].joints().len(), 7);
    }

    #[test]
    fn straight_stroke_rejected() {
        let p = Params::default();
        let stroke = vec![Point2::new(10.0, 10.0), Point2::new(100.0, 100.0), Point2::new(200.0, 200.0)];
        let err = sketch_to_chains(&[stroke], (256.0, 256.0), &p).unwrap_err();
        assert!(matches!(err, Error::EmptyQuery { code: "too_simple", .. }));
        let err = sketch_to_chains(&[vec![Point2::new(1.0, 1.0)]], (256.0, 256.0), &p).unwrap_err();
        assert!(matches!(err, Error::EmptyQuery { code: "no_strokes", .. }));
    }

    fn geometry(points: &[(f64, f64)], length: f64) -> PairGeometry {
        let pts: Vec<Point2> = points.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let c = centroid(pts.iter().copied());
        PairGeometry {
            sketch_points: pts.clone(),
            image_points: pts,
            sketch_centroid: c,
            image_centroid: c,
            sketch_length: length,
            image_length: length,
        }
    }

    #[test]
    fn distance_consistency_values() {
        let p = geometry(&[(0.0, 0.0), (10.0, 0.0)], 20.0);
        let mut q = geometry(&[(50.0, 0.0), (60.0, 0.0)], 20.0);
        assert!((pair_distance_consistency(&p, &q, 1.0) - 1.0).abs() < 1e-12);
        // Image centroids twice as far apart.
        q.image_centroid = Point2::new(105.0, 0.0);
        assert!((pair_distance_consistency(&p, &q, 1.0) - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn angular_consistency_values() {
        let p = geometry(&[(0.0, -5.0), (0.0, 5.0)], 20.0);
        let q = geometry(&[(50.0, -5.0), (50.0, 5.0)], 20.0);
        assert!((pair_angular_consistency(&p, &q, 2.0) - 1.0).abs() < 1e-12);
        // Rotate the image joints of p by 0.1 about its centroid.
        let mut r = p.clone();
        r.image_points = r
            .image_points
            .iter()
            .map(|pt| {
                let (s, c) = 0.1f64.sin_cos();
                Point2::new(c * pt.x - s * pt.y, s * pt.x + c * pt.y)
            })
            .collect();
        assert!((pair_angular_consistency(&r, &q, 2.0) - (-0.2f64).exp()).abs() < 1e-12);
        // Swapped layout: the axis turns by π while the joints stay put.
        let mut swapped = q.clone();
        swapped.image_centroid = Point2::new(-50.0, 0.0);
        assert!((pair_angular_consistency(&p, &swapped, 2.0) - (-2.0 * PI).exp()).abs() < 1e-12);
    }

    fn pair_with(score: f64, variant: FlipVariant, pts: &[(f64, f64)]) -> MatchedPair {
        let pts: Vec<Point2> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let c = centroid(pts.iter().copied());
        MatchedPair {
            sketch_chain: 0,
            image_chain: 0,
            sketch_chain_id: "s0".into(),
            image_chain_id: "c0".into(),
            result: MatchResult {
                score,
                cms: score,
                gac: 1.0,
                variant_used: variant,
                ..Default::default()
            },
            sketch_points: pts.clone(),
            image_points: pts,
            sketch_centroid: c,
            image_centroid: c,
            matched_length_sketch: 30.0,
            matched_length_image: 30.0,
            gc: 1.0,
        }
    }

    #[test]
    fn single_pair_keeps_its_score() {
        let ranked = rank_images(
            vec![("img".into(), vec![pair_with(3.2, FlipVariant::Identity, &[(0.0, 0.0), (5.0, 1.0)])])],
            &RetrievalParams::default(),
        );
        assert_eq!(ranked[0].score, 3.2);
        assert!(rank_images(Vec::new(), &RetrievalParams::default()).is_empty());
    }

    #[test]
    fn consistent_layout_outranks_swapped() {
        let a = [(10.0, 10.0), (30.0, 20.0), (20.0, 40.0)];
        let b = [(150.0, 10.0), (170.0, 25.0), (160.0, 40.0)];
        let consistent = vec![pair_with(3.0, FlipVariant::Identity, &a), pair_with(3.0, FlipVariant::Identity, &b)];
        // Same chains, but each image chain sits where the other was.
        let mut swapped = consistent.clone();
        let shift = |pts: &[Point2], d: Point2| -> Vec<Point2> { pts.iter().map(|p| Point2::new(p.x + d.x, p.y + d.y)).collect() };
        let d0 = consistent[1].image_centroid.sub(consistent[0].image_centroid);
        let d1 = Point2::new(-d0.x, -d0.y);
        swapped[0].image_points = shift(&consistent[0].image_points, d0);
        swapped[0].image_centroid = centroid(swapped[0].image_points.iter().copied());
        swapped[1].image_points = shift(&consistent[1].image_points, d1);
        swapped[1].image_centroid = centroid(swapped[1].image_points.iter().copied());
        let ranked = rank_images(
            vec![("bad".into(), swapped), ("good".into(), consistent)],
            &RetrievalParams::default(),
        );
        assert_eq!(ranked[0].image_id, "good");
        assert!((ranked[0].score - 6.0).abs() < 1e-9);
        assert!(ranked[0].score >= 5.0 * ranked[1].score);
        assert!(ranked[1].pairs.iter().all(|p| p.gc <= 0.1));
    }

    #[test]
    fn greedy_prefers_higher_score() {
        // Both sketch chains prefer image chain 0.
        let cands = vec![(4.0, 0, 0), (3.0, 0, 1), (3.5, 1, 0), (2.0, 1, 1)];
        let picks = greedy_one_to_one(&cands);
        let chosen: Vec<(usize, usize)> = picks.iter().map(|&p| (cands[p].1, cands[p].2)).collect();
        assert_eq!(chosen, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn matched_pair_maps_reversed_indices_back() {
        let pts: Vec<Point2> = [(0.0, 0.0), (20.0, 0.0), (20.0, 20.0), (40.0, 30.0), (60.0, 20.0)]
            .iter()
            .map(|&(x, y)| Point2::new(x, y))
            .collect();
        let d = descriptor_from_points(&pts, 0.5).unwrap();
        let result = MatchResult {
            pairs: vec![(0, 2), (1, 1), (2, 0)],
            variant_used: FlipVariant::Reversed,
            ..Default::default()
        };
        let mp = matched_pair(0, &d, "s0", 0, &d, "c0", result);
        assert_eq!(mp.image_points, d.points);
        let total: f64 = d.segment_lengths().iter().sum();
        assert!((mp.matched_length_image - total).abs() < 1e-9);
        assert!((mp.matched_length_sketch - total).abs() < 1e-9);
    }
}
