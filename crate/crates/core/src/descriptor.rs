//! Similarity-invariant chain descriptors and their flip variants.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::model::{Chain, ChainDescriptor, FlipVariant, Point2};

/// Joint angle between the incoming direction `d_in` and the outgoing
/// direction `d_out`, measured so that going straight on gives `π` and a left
/// (anticlockwise) quarter turn gives `π/2`.
pub fn joint_angle(d_in: Point2, d_out: Point2) -> f64 {
    let cross = d_in.x * d_out.y - d_in.y * d_out.x;
    let dot = d_in.x * d_out.x + d_in.y * d_out.y;
    wrap_angle(PI - cross.atan2(dot))
}

/// Maps any angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Rounds an angle onto a grid of `2^-50` so that reflecting it about `π`
/// (`2π - θ`) is exact and undoes itself.
pub fn snap_angle(a: f64) -> f64 {
    const GRID: f64 = (1u64 << 50) as f64;
    wrap_angle((a * GRID).round() / GRID)
}

/// Moves a ratio by at most a few ulps to a value whose reciprocal maps back
/// to it exactly, so reversing a descriptor twice restores it bit for bit.
pub fn stable_ratio(g: f64) -> f64 {
    let round_trips = |x: f64| 1.0 / (1.0 / x) == x;
    if round_trips(g) {
        return g;
    }
    let (mut up, mut down) = (g, g);
    for _ in 0..16 {
        up = up.next_up();
        if round_trips(up) {
            return up;
        }
        down = down.next_down();
        if round_trips(down) {
            return down;
        }
    }
    g
}

/// How far a joint departs from a straight continuation, in `[0, 1)`.
pub fn sharpness(theta: f64) -> f64 {
    1.0 - (-(PI - theta).abs()).exp()
}

/// Describes every interior joint of `chain` by its segment length ratio and
/// joint angle, plus the penalty for skipping it.
pub fn build_descriptor(chain: &Chain, lambda_skc: f64) -> Result<ChainDescriptor> {
    descriptor_from_points(chain.joints(), lambda_skc)
}

/// Same as [`build_descriptor`] on a raw joint list.
pub fn descriptor_from_points(joints: &[Point2], lambda_skc: f64) -> Result<ChainDescriptor> {
    if joints.len() < 3 {
        return Err(Error::TooShort {
            joints: joints.len(),
            required: 3,
        });
    }
    let lengths: Vec<f64> = joints.windows(2).map(|w| w[0].dist(w[1])).collect();
    if lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::invalid("chain has a zero-length or non-finite segment"));
    }
    let total_length: f64 = lengths.iter().sum();
    let n = joints.len() - 2;
    let mut d = ChainDescriptor {
        gammas: Vec::with_capacity(n),
        thetas: Vec::with_capacity(n),
        skip_weights: Vec::with_capacity(n),
        points: Vec::with_capacity(n),
        total_length,
        flip_variant: FlipVariant::Identity,
    };
    for i in 0..n {
        let (a, j, b) = (joints[i], joints[i + 1], joints[i + 2]);
        let (l_in, l_out) = (lengths[i], lengths[i + 1]);
        let theta = snap_angle(joint_angle(j.sub(a), b.sub(j)));
        d.gammas.push(stable_ratio(l_in / l_out));
        d.thetas.push(theta);
        d.skip_weights
            .push(sharpness(theta) + lambda_skc * 0.5 * (l_in + l_out) / total_length);
        d.points.push(j);
    }
    Ok(d)
}

/// Horizontal reflection about the vertical axis `x = 0`. Mirrored points
/// only feed comparisons that ignore position, and negation undoes itself
/// exactly.
pub fn mirror_point(p: Point2) -> Point2 {
    Point2::new(-p.x, p.y)
}

fn reverse(d: &ChainDescriptor) -> ChainDescriptor {
    ChainDescriptor {
        gammas: d.gammas.iter().rev().map(|g| 1.0 / g).collect(),
        thetas: d.thetas.iter().rev().map(|&t| wrap_angle(TAU - t)).collect(),
        skip_weights: d.skip_weights.iter().rev().copied().collect(),
        points: d.points.iter().rev().copied().collect(),
        total_length: d.total_length,
        flip_variant: d.flip_variant,
    }
}

fn mirror(d: &ChainDescriptor) -> ChainDescriptor {
    ChainDescriptor {
        gammas: d.gammas.clone(),
        thetas: d.thetas.iter().map(|&t| wrap_angle(TAU - t)).collect(),
        skip_weights: d.skip_weights.clone(),
        points: d.points.iter().map(|&p| mirror_point(p)).collect(),
        total_length: d.total_length,
        flip_variant: d.flip_variant,
    }
}

fn compose(a: FlipVariant, b: FlipVariant) -> FlipVariant {
    match (a.is_reversed() != b.is_reversed(), a.is_mirrored() != b.is_mirrored()) {
        (false, false) => FlipVariant::Identity,
        (true, false) => FlipVariant::Reversed,
        (false, true) => FlipVariant::Mirrored,
        (true, true) => FlipVariant::ReversedMirrored,
    }
}

/// Applies `variant` on top of whatever variant `d` already carries.
pub fn variant_descriptor(d: &ChainDescriptor, variant: FlipVariant) -> ChainDescriptor {
    let mut out = match variant {
        FlipVariant::Identity => return d.clone(),
        FlipVariant::Reversed => reverse(d),
        FlipVariant::Mirrored => mirror(d),
        FlipVariant::ReversedMirrored => mirror(&reverse(d)),
    };
    out.flip_variant = compose(d.flip_variant, variant);
    out
}

/// A descriptor together with its four orientations, built once so repeated
/// matching against it does not re-derive them.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedDescriptor {
    variants: [ChainDescriptor; 4],
}

impl PreparedDescriptor {
    pub fn new(d: ChainDescriptor) -> Self {
        let variants = FlipVariant::ALL.map(|v| variant_descriptor(&d, v));
        Self { variants }
    }

    pub fn base(&self) -> &ChainDescriptor {
        &self.variants[0]
    }

    /// Variants in [`FlipVariant::ALL`] order.
    pub fn variants(&self) -> &[ChainDescriptor; 4] {
        &self.variants
    }
}
