//! Partial chain alignment by dynamic programming, weighted by how well the
//! matched joints agree in overall layout.

use std::f64::consts::{PI, TAU};

use crate::descriptor::PreparedDescriptor;
use crate::error::{Error, Result};
use crate::model::{centroid, ChainDescriptor, FlipVariant, MatchResult, Point2};
use crate::params::MatchParams;

/// `min(a/b, b/a)` for positive reals.
pub fn ratio_similarity(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!(
            "ratio similarity needs positive finite values, got {a} and {b}"
        )));
    }
    Ok(omega(a, b))
}

#[inline]
fn omega(a: f64, b: f64) -> f64 {
    if a < b {
        a / b
    } else {
        b / a
    }
}

/// Absolute difference of two angles taken around the circle, in `[0, π]`.
#[inline]
pub fn circular_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Similarity of two joints given their length ratios and joint angles.
#[inline]
pub fn joint_score(gamma_a: f64, theta_a: f64, gamma_b: f64, theta_b: f64, params: &MatchParams) -> f64 {
    (-params.lambda_lr * (1.0 - omega(gamma_a, gamma_b))
        - params.lambda_ang * circular_difference(theta_a, theta_b))
    .exp()
}

/// Skip costs for one matching direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkipCosts {
    pub alpha_a: f64,
    pub alpha_b: f64,
}

impl SkipCosts {
    /// Costs for matching `a` against a database chain.
    pub fn new(a_is_sketch: bool, params: &MatchParams) -> Self {
        Self {
            alpha_a: if a_is_sketch {
                params.alpha_sketch
            } else {
                params.alpha_image
            },
            alpha_b: params.alpha_image,
        }
    }
}

/// Best alignment score only, in linear memory.
pub fn dp_score(a: &ChainDescriptor, b: &ChainDescriptor, costs: SkipCosts, params: &MatchParams) -> f64 {
    let m = b.len();
    let skip_b: Vec<f64> = b.skip_weights.iter().map(|w| w * costs.alpha_b).collect();
    let mut prev = vec![0.0; m + 1];
    let mut cur = vec![0.0; m + 1];
    let mut best = 0.0f64;
    for i in 0..a.len() {
        let (ga, ta) = (a.gammas[i], a.thetas[i]);
        let skip_a = a.skip_weights[i] * costs.alpha_a;
        cur[0] = 0.0;
        for j in 0..m {
            let diag = prev[j] + joint_score(ga, ta, b.gammas[j], b.thetas[j], params);
            let v = diag
                .max(prev[j + 1] - skip_a)
                .max(cur[j] - skip_b[j])
                .max(0.0);
            cur[j + 1] = v;
            best = best.max(v);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Fills the alignment table and recovers the best-scoring alignment.
///
/// `gac` is left at 1 and `score` equals `cms`; [`chain_similarity`] fills in
/// the angle consistency.
pub fn dp_match(a: &ChainDescriptor, b: &ChainDescriptor, costs: SkipCosts, params: &MatchParams) -> MatchResult {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut table = vec![0.0; (n + 1) * w];
    let mut best = (0.0f64, 0usize, 0usize);
    for i in 1..=n {
        let skip_a = a.skip_weights[i - 1] * costs.alpha_a;
        for j in 1..=m {
            let s = joint_score(a.gammas[i - 1], a.thetas[i - 1], b.gammas[j - 1], b.thetas[j - 1], params);
            let diag = table[(i - 1) * w + j - 1] + s;
            let up = table[(i - 1) * w + j] - skip_a;
            let left = table[i * w + j - 1] - b.skip_weights[j - 1] * costs.alpha_b;
            let v = diag.max(up).max(left).max(0.0);
            table[i * w + j] = v;
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }

    let mut result = MatchResult {
        cms: best.0,
        gac: 1.0,
        score: best.0,
        variant_used: b.flip_variant,
        ..Default::default()
    };
    let (mut i, mut j) = (best.1, best.2);
    while i > 0 && j > 0 && table[i * w + j] > 0.0 {
        let v = table[i * w + j];
        let s = joint_score(a.gammas[i - 1], a.thetas[i - 1], b.gammas[j - 1], b.thetas[j - 1], params);
        if v == table[(i - 1) * w + j - 1] + s {
            result.pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if v == table[(i - 1) * w + j] - a.skip_weights[i - 1] * costs.alpha_a {
            result.skipped_a.push(i - 1);
            i -= 1;
        } else {
            result.skipped_b.push(j - 1);
            j -= 1;
        }
    }
    result.pairs.reverse();
    result.skipped_a.reverse();
    result.skipped_b.reverse();
    result
}

/// Unsigned angle subtended at `c` by `p` and `q`; 0 if either coincides
/// with `c`.
fn subtended(c: Point2, p: Point2, q: Point2) -> f64 {
    let (u, v) = (p.sub(c), q.sub(c));
    if u.norm() == 0.0 || v.norm() == 0.0 {
        return 0.0;
    }
    let cross = u.x * v.y - u.y * v.x;
    let dot = u.x * v.x + u.y * v.y;
    cross.abs().atan2(dot)
}

/// Agreement of the angles that consecutive matched joints subtend at the
/// centroid of the matched joints, compared across both chains.
pub fn global_angle_consistency(
    a: &ChainDescriptor,
    b: &ChainDescriptor,
    pairs: &[(usize, usize)],
    lambda_ac: f64,
) -> f64 {
    let n = pairs.len();
    if n < 2 {
        return 1.0;
    }
    let ca = centroid(pairs.iter().map(|&(i, _)| a.points[i]));
    let cb = centroid(pairs.iter().map(|&(_, j)| b.points[j]));
    let total: f64 = pairs
        .windows(2)
        .map(|w| {
            let ang_a = subtended(ca, a.points[w[0].0], a.points[w[1].0]);
            let ang_b = subtended(cb, b.points[w[0].1], b.points[w[1].1]);
            (ang_a - ang_b).abs()
        })
        .sum();
    (-lambda_ac * total / n as f64).exp()
}

/// Matches `a` against every orientation of `b` and scores the best one.
pub fn chain_similarity(a: &ChainDescriptor, b: &ChainDescriptor, a_is_sketch: bool, params: &MatchParams) -> MatchResult {
    let variants = FlipVariant::ALL.map(|v| crate::descriptor::variant_descriptor(b, v));
    best_of_variants(a, &variants, SkipCosts::new(a_is_sketch, params), params)
}

/// [`chain_similarity`] against precomputed orientations of `b`.
pub fn chain_similarity_prepared(
    a: &ChainDescriptor,
    b: &PreparedDescriptor,
    costs: SkipCosts,
    params: &MatchParams,
) -> MatchResult {
    best_of_variants(a, b.variants(), costs, params)
}

/// Chain score only.
pub fn chain_score_prepared(a: &ChainDescriptor, b: &PreparedDescriptor, costs: SkipCosts, params: &MatchParams) -> f64 {
    chain_similarity_prepared(a, b, costs, params).score
}

fn best_of_variants(a: &ChainDescriptor, variants: &[ChainDescriptor; 4], costs: SkipCosts, params: &MatchParams) -> MatchResult {
    let mut best_idx = 0;
    let mut best_cms = f64::NEG_INFINITY;
    for (k, v) in variants.iter().enumerate() {
        let cms = dp_score(a, v, costs, params);
        if cms > best_cms {
            best_cms = cms;
            best_idx = k;
        }
    }
    let b = &variants[best_idx];
    let mut result = dp_match(a, b, costs, params);
    result.gac = global_angle_consistency(a, b, &result.pairs, params.lambda_ac);
    result.score = result.gac * result.cms;
    result
}
