//! Procedural shape outlines and random chains for tests and benchmarks.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::model::{centroid, Point2, FRAME_SIZE};

/// Outline families used to build synthetic corpora.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeClass {
    Star,
    Mug,
    Bottle,
    Swan,
    Arrow,
    House,
    Lightning,
    Cross,
    Heart,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 9] = [
        ShapeClass::Star,
        ShapeClass::Mug,
        ShapeClass::Bottle,
        ShapeClass::Swan,
        ShapeClass::Arrow,
        ShapeClass::House,
        ShapeClass::Lightning,
        ShapeClass::Cross,
        ShapeClass::Heart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeClass::Star => "star",
            ShapeClass::Mug => "mug",
            ShapeClass::Bottle => "bottle",
            ShapeClass::Swan => "swan",
            ShapeClass::Arrow => "arrow",
            ShapeClass::House => "house",
            ShapeClass::Lightning => "lightning",
            ShapeClass::Cross => "cross",
            ShapeClass::Heart => "heart",
        }
    }

    /// Polygon vertices of the outline in unit-ish coordinates, not closed.
    pub fn outline(self) -> Vec<Point2> {
        let v: Vec<(f64, f64)> = match self {
            ShapeClass::Star => (0..10)
                .map(|k| {
                    let r = if k % 2 == 0 { 1.0 } else { 0.4 };
                    let a = -PI / 2.0 + k as f64 * PI / 5.0;
                    (r * a.cos(), r * a.sin())
                })
                .collect(),
            ShapeClass::Mug => vec![
                (0.0, 0.0),
                (0.0, 1.2),
                (0.9, 1.2),
                (0.9, 0.95),
                (1.25, 0.95),
                (1.4, 0.6),
                (1.25, 0.3),
                (0.9, 0.3),
                (0.9, 0.0),
            ],
            ShapeClass::Bottle => vec![
                (0.38, 0.0),
                (0.62, 0.0),
                (0.62, 0.35),
                (0.9, 0.6),
                (0.9, 1.5),
                (0.1, 1.5),
                (0.1, 0.6),
                (0.38, 0.35),
            ],
            ShapeClass::Swan => vec![
                (0.0, 1.0),
                (0.3, 1.3),
                (1.2, 1.3),
                (1.5, 0.9),
                (1.1, 0.95),
                (0.8, 0.8),
                (0.75, 0.4),
                (0.9, 0.1),
                (0.7, 0.0),
                (0.55, 0.15),
                (0.6, 0.5),
                (0.55, 0.85),
                (0.3, 0.9),
            ],
            ShapeClass::Arrow => vec![
                (0.0, 0.4),
                (1.0, 0.4),
                (1.0, 0.1),
                (1.6, 0.6),
                (1.0, 1.1),
                (1.0, 0.8),
                (0.0, 0.8),
            ],
            ShapeClass::House => vec![
                (0.0, 1.0),
                (0.0, 0.45),
                (0.5, 0.0),
                (1.0, 0.45),
                (1.0, 1.0),
                (0.65, 1.0),
                (0.65, 0.65),
                (0.35, 0.65),
                (0.35, 1.0),
            ],
            ShapeClass::Lightning => vec![
                (0.4, 0.0),
                (0.9, 0.0),
                (0.65, 0.45),
                (0.95, 0.45),
                (0.3, 1.3),
                (0.5, 0.7),
                (0.2, 0.7),
            ],
            ShapeClass::Cross => vec![
                (0.35, 0.0),
                (0.65, 0.0),
                (0.65, 0.35),
                (1.0, 0.35),
                (1.0, 0.65),
                (0.65, 0.65),
                (0.65, 1.0),
                (0.35, 1.0),
                (0.35, 0.65),
                (0.0, 0.65),
                (0.0, 0.35),
                (0.35, 0.35),
            ],
            ShapeClass::Heart => vec![
                (0.5, 0.25),
                (0.7, 0.02),
                (0.95, 0.05),
                (1.05, 0.3),
                (0.95, 0.6),
                (0.5, 1.05),
                (0.05, 0.6),
                (-0.05, 0.3),
                (0.05, 0.05),
                (0.3, 0.02),
            ],
        };
        v.into_iter().map(|(x, y)| Point2::new(x, y)).collect()
    }

    /// The outline as an open chain that returns to its first vertex.
    pub fn closed_chain(self) -> Vec<Point2> {
        let mut c = self.outline();
        c.push(c[0]);
        c
    }
}

/// Scales by `scale`, rotates by `rotation` about the origin, then translates.
pub fn similarity_transform(points: &[Point2], scale: f64, rotation: f64, translation: Point2) -> Vec<Point2> {
    let (s, c) = rotation.sin_cos();
    points
        .iter()
        .map(|p| {
            Point2::new(
                scale * (c * p.x - s * p.y) + translation.x,
                scale * (s * p.x + c * p.y) + translation.y,
            )
        })
        .collect()
}

fn extent(points: &[Point2]) -> f64 {
    let c = centroid(points.iter().copied());
    points.iter().map(|p| p.dist(c)).fold(0.0, f64::max)
}

/// Random rotation and a scale and position that keep the shape inside the
/// normalized frame.
pub fn place_randomly<R: Rng + ?Sized>(points: &[Point2], rng: &mut R) -> Vec<Point2> {
    let c = centroid(points.iter().copied());
    let centred: Vec<Point2> = points.iter().map(|p| p.sub(c)).collect();
    let r = extent(&centred).max(f64::MIN_POSITIVE);
    let radius = rng.random_range(0.15..0.45) * FRAME_SIZE;
    let scale = radius / r;
    let margin = radius + 1.0;
    let t = Point2::new(
        rng.random_range(margin..(FRAME_SIZE - margin).max(margin + 1e-9)),
        rng.random_range(margin..(FRAME_SIZE - margin).max(margin + 1e-9)),
    );
    similarity_transform(&centred, scale, rng.random_range(0.0..TAU), t)
}

/// Moves every point by up to `amount` times the shape radius in each axis.
pub fn perturb<R: Rng + ?Sized>(points: &[Point2], amount: f64, rng: &mut R) -> Vec<Point2> {
    let r = extent(points) * amount;
    if r <= 0.0 {
        return points.to_vec();
    }
    let closed = points.len() > 2 && points.first() == points.last();
    let mut out: Vec<Point2> = points
        .iter()
        .map(|p| Point2::new(p.x + rng.random_range(-r..r), p.y + rng.random_range(-r..r)))
        .collect();
    if closed {
        let last = out.len() - 1;
        out[last] = out[0];
    }
    out
}

/// A placed, mildly perturbed instance of `class` as a closed chain.
pub fn shape_instance<R: Rng + ?Sized>(class: ShapeClass, noise: f64, rng: &mut R) -> Vec<Point2> {
    perturb(&place_randomly(&class.closed_chain(), rng), noise, rng)
}

/// Random polyline of `joints` points with segment lengths in `[4, 40]` and
/// arbitrary turns, kept inside the frame.
pub fn random_chain<R: Rng + ?Sized>(joints: usize, rng: &mut R) -> Vec<Point2> {
    let mut pts = Vec::with_capacity(joints);
    let mut p = Point2::new(rng.random_range(40.0..216.0), rng.random_range(40.0..216.0));
    let mut heading = rng.random_range(0.0..TAU);
    pts.push(p);
    while pts.len() < joints {
        heading += rng.random_range(-2.8..2.8);
        let len = rng.random_range(4.0..40.0);
        let mut q = Point2::new(p.x + len * heading.cos(), p.y + len * heading.sin());
        if !(0.0..=FRAME_SIZE).contains(&q.x) || !(0.0..=FRAME_SIZE).contains(&q.y) {
            heading += PI;
            q = Point2::new(p.x + len * heading.cos(), p.y + len * heading.sin());
            q = Point2::new(q.x.clamp(0.0, FRAME_SIZE), q.y.clamp(0.0, FRAME_SIZE));
        }
        if q.dist(p) > 1e-6 {
            pts.push(q);
            p = q;
        }
    }
    pts
}

/// A contiguous piece of `points` with at least `min_joints` points.
pub fn random_span<R: Rng + ?Sized>(points: &[Point2], min_joints: usize, rng: &mut R) -> Vec<Point2> {
    let n = points.len();
    if n <= min_joints {
        return points.to_vec();
    }
    let len = rng.random_range(min_joints..=n);
    let start = rng.random_range(0..=n - len);
    points[start..start + len].to_vec()
}
