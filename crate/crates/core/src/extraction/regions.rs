//! Region proposal boundaries as closed chains.

use super::curvature::{bend_profile, densify, local_maxima};
use crate::model::{Chain, ChainSource, Point2};
use crate::params::ExtractionParams;

fn closed_ring(polygon: &[Point2]) -> Vec<Point2> {
    let mut ring: Vec<Point2> = Vec::with_capacity(polygon.len());
    for &p in polygon {
        if p.is_finite() && ring.last() != Some(&p) {
            ring.push(p);
        }
    }
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    ring
}

fn ring_edges(ring: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    ring.iter()
        .enumerate()
        .map(move |(i, &a)| (a, ring[(i + 1) % ring.len()]))
}

pub fn perimeter(ring: &[Point2]) -> f64 {
    ring_edges(ring).map(|(a, b)| a.dist(b)).sum()
}

/// Fraction of the boundary lying within `margin` of the frame edge.
pub fn border_fraction(ring: &[Point2], frame: (f64, f64), margin: f64) -> f64 {
    let (w, h) = frame;
    let near = |p: Point2| p.x.min(p.y).min(w - p.x).min(h - p.y) <= margin;
    let mut touching = 0.0;
    let mut total = 0.0;
    for (a, b) in ring_edges(ring) {
        let len = a.dist(b);
        let pieces = (len / 0.25).ceil().max(1.0) as usize;
        let piece = len / pieces as f64;
        for k in 0..pieces {
            let f = (k as f64 + 0.5) / pieces as f64;
            let mid = Point2::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f);
            if near(mid) {
                touching += piece;
            }
        }
        total += len;
    }
    if total > 0.0 {
        touching / total
    } else {
        0.0
    }
}

/// Turns scored region proposals (best first) into closed chains.
///
/// Only the first `n_gop` polygons are considered. Polygons with more than
/// half of their perimeter within `border_margin` of the frame edge, or with
/// perimeter below `min_perimeter`, are discarded. Survivors are split at bend
/// points and become one chain that starts and ends at the sharpest joint.
/// Boundaries with fewer than two bend points carry no joints and are skipped.
pub fn ingest_region_boundaries(
    polygons: &[Vec<Point2>],
    frame: (f64, f64),
    image_id: &str,
    params: &ExtractionParams,
) -> Vec<Chain> {
    let mut out = Vec::new();
    for (k, polygon) in polygons.iter().take(params.n_gop).enumerate() {
        let ring = closed_ring(polygon);
        if ring.len() < 3 {
            continue;
        }
        let per = perimeter(&ring);
        if per < params.min_perimeter {
            continue;
        }
        if border_fraction(&ring, frame, params.border_margin) > 0.5 {
            continue;
        }
        let mut closed = ring.clone();
        closed.push(ring[0]);
        let mut dense = densify(&closed, params.resample_step);
        dense.pop();
        let profile = bend_profile(&dense, params.scale_m, params.sigma, true);
        let bends = local_maxima(&profile, params.split_threshold, true);
        if bends.len() < 2 {
            continue;
        }
        let sharpest = (0..bends.len())
            .max_by(|&a, &b| {
                profile[bends[a]]
                    .total_cmp(&profile[bends[b]])
                    .then(b.cmp(&a))
            })
            .unwrap();
        let mut joints: Vec<Point2> = (0..bends.len())
            .map(|i| dense[bends[(sharpest + i) % bends.len()]])
            .collect();
        joints.push(joints[0]);
        if let Ok(chain) = Chain::new(image_id, format!("r{k}"), ChainSource::Region, joints) {
            out.push(chain);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, side: f64) -> Vec<Point2> {
        vec![
            Point2::new(x0, y0),
            Point2::new(x0 + side, y0),
            Point2::new(x0 + side, y0 + side),
            Point2::new(x0, y0 + side),
        ]
    }

    #[test]
    fn centred_square_kept_with_four_joints() {
        let p = ExtractionParams::default();
        let chains = ingest_region_boundaries(&[square(78.0, 78.0, 100.0)], (256.0, 256.0), "img", &p);
        assert_eq!(chains.len(), 1);
        let joints = chains[0].joints();
        assert_eq!(joints.len(), 5);
        assert_eq!(joints.first(), joints.last());
        let mut corners: Vec<Point2> = joints[..4].to_vec();
        corners.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let mut expected = square(78.0, 78.0, 100.0);
        expected.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        assert_eq!(corners, expected);
        assert_eq!(chains[0].source, ChainSource::Region);
    }

    #[test]
    fn border_hugging_polygon_discarded() {
        let p = ExtractionParams::default();
        // Runs along the top, left and bottom edges of the frame.
        let poly = vec![
            Point2::new(200.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 255.0),
            Point2::new(200.0, 255.0),
        ];
        assert!(border_fraction(&poly, (256.0, 256.0), 3.0) > 0.5);
        assert!(ingest_region_boundaries(&[poly], (256.0, 256.0), "img", &p).is_empty());
    }

    #[test]
    fn tiny_region_discarded() {
        let p = ExtractionParams::default();
        assert!(ingest_region_boundaries(&[square(100.0, 100.0, 5.0)], (256.0, 256.0), "img", &p).is_empty());
    }

    #[test]
    fn only_top_n_considered() {
        let p = ExtractionParams::default();
        let polys: Vec<Vec<Point2>> = (0..25).map(|i| square(40.0 + i as f64, 40.0, 60.0 + i as f64)).collect();
        let chains = ingest_region_boundaries(&polys, (256.0, 256.0), "img", &p);
        assert_eq!(chains.len(), 20);
        assert_eq!(chains.last().unwrap().chain_id, "r19");
    }
}
