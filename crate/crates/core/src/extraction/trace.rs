//! Turning edge rasters and raw polylines into clean open polylines.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::Point2;

/// Binary edge raster, row-major, nonzero bytes are edge pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl EdgeMask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("edge mask has a zero dimension"));
        }
        if width.checked_mul(height) != Some(data.len()) {
            return Err(Error::invalid(format!(
                "edge mask of {width}x{height} needs {} bytes, got {}",
                width.saturating_mul(height),
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a mask from rows of `'#'` (edge) and anything else (background).
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut data = vec![0u8; width * height];
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.bytes().enumerate() {
                if c == b'#' {
                    data[y * width + x] = 255;
                }
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn is_edge(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize] != 0
    }

    /// Neighbours under mixed adjacency: 4-neighbours always, diagonal
    /// neighbours only when no 4-connected route joins the two pixels.
    /// This keeps one-pixel-wide staircases free of spurious triangles.
    fn neighbours(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let x = (idx % self.width) as isize;
        let y = (idx / self.width) as isize;
        const DIRS: [(isize, isize); 8] = [
            (1, 0),
            (0, 1),
            (-1, 0),
            (0, -1),
            (1, 1),
            (-1, 1),
            (-1, -1),
            (1, -1),
        ];
        DIRS.iter().filter_map(move |&(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            if !self.is_edge(nx, ny) {
                return None;
            }
            if dx != 0 && dy != 0 && (self.is_edge(x + dx, y) || self.is_edge(x, y + dy)) {
                return None;
            }
            Some(ny as usize * self.width + nx as usize)
        })
    }

    fn point(&self, idx: usize) -> Point2 {
        Point2::new((idx % self.width) as f64, (idx / self.width) as f64)
    }
}

/// Input accepted by [`trace_edge_contours`].
#[derive(Clone, Debug)]
pub enum ContourInput {
    Mask(EdgeMask),
    Polylines(Vec<Vec<Point2>>),
}

pub fn trace_edge_contours(input: &ContourInput) -> Vec<Vec<Point2>> {
    match input {
        ContourInput::Mask(mask) => trace_mask(mask),
        ContourInput::Polylines(lines) => clean_polylines(lines),
    }
}

/// Drops consecutive duplicate points and polylines left with fewer than two.
pub fn clean_polylines(lines: &[Vec<Point2>]) -> Vec<Vec<Point2>> {
    lines
        .iter()
        .filter_map(|line| {
            let mut out: Vec<Point2> = Vec::with_capacity(line.len());
            for &p in line {
                if !p.is_finite() {
                    continue;
                }
                if out.last() != Some(&p) {
                    out.push(p);
                }
            }
            (out.len() >= 2).then_some(out)
        })
        .collect()
}

/// Traces pixel runs of an edge mask into open polylines.
///
/// Runs start and stop at end pixels (one neighbour) and branch pixels (three
/// or more), so every branch pixel ends each run that touches it. Closed loops
/// without any such pixel are returned with the first point repeated.
pub fn trace_mask(mask: &EdgeMask) -> Vec<Vec<Point2>> {
    let n = mask.width * mask.height;
    let degree: Vec<u8> = (0..n)
        .map(|i| {
            if mask.data[i] == 0 {
                0
            } else {
                mask.neighbours(i).count() as u8
            }
        })
        .collect();
    let is_node = |i: usize| mask.data[i] != 0 && degree[i] != 2;
    let key = |a: usize, b: usize| (a.min(b), a.max(b));

    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut out = Vec::new();

    let walk = |start: usize, first: usize, used: &mut HashSet<(usize, usize)>| {
        let mut path = vec![start, first];
        used.insert(key(start, first));
        let (mut prev, mut cur) = (start, first);
        while !is_node(cur) && cur != start {
            let next = mask
                .neighbours(cur)
                .find(|&q| q != prev && !used.contains(&key(cur, q)));
            let Some(next) = next else { break };
            used.insert(key(cur, next));
            path.push(next);
            prev = cur;
            cur = next;
        }
        path
    };

    for i in (0..n).filter(|&i| is_node(i)) {
        let nbrs: Vec<usize> = mask.neighbours(i).collect();
        for q in nbrs {
            if used.contains(&key(i, q)) {
                continue;
            }
            let path = walk(i, q, &mut used);
            out.push(path.into_iter().map(|p| mask.point(p)).collect());
        }
    }

    // Remaining unvisited pixels lie on closed loops.
    for i in 0..n {
        if mask.data[i] == 0 || degree[i] != 2 {
            continue;
        }
        let next = mask.neighbours(i).find(|&q| !used.contains(&key(i, q)));
        if let Some(q) = next {
            let path = walk(i, q, &mut used);
            out.push(path.into_iter().map(|p| mask.point(p)).collect());
        }
    }
    out
}
