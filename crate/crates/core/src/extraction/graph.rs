//! The weighted joint graph over segment endpoints and its maximum spanning
//! forest.

use std::collections::HashMap;

use crate::model::{centroid, polyline_length, Point2};

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    /// Length of `polyline`.
    pub weight: f64,
    /// Segment geometry running from vertex `u` to vertex `v`.
    pub polyline: Vec<Point2>,
}

/// Contour segment network: merged segment endpoints joined by segments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JointGraph {
    pub vertices: Vec<Point2>,
    pub edges: Vec<GraphEdge>,
}

impl JointGraph {
    /// Distinct neighbouring vertices of every vertex, with one connecting
    /// edge each (the first in edge order).
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if !adj[e.u].iter().any(|&(n, _)| n == e.v) {
                adj[e.u].push((e.v, i));
            }
            if !adj[e.v].iter().any(|&(n, _)| n == e.u) {
                adj[e.v].push((e.u, i));
            }
        }
        adj
    }

    pub fn total_weight(&self, edges: &[usize]) -> f64 {
        edges.iter().map(|&e| self.edges[e].weight).sum()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `false` when both were already in one set.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }
}

/// Single-linkage clusters of `points` at distance `radius`, as a cluster
/// label per point. Labels are numbered by first appearance.
fn single_linkage(points: &[Point2], radius: f64) -> Vec<usize> {
    let mut uf = UnionFind::new(points.len());
    let cell = radius.max(f64::MIN_POSITIVE);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Point2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    for (i, &p) in points.iter().enumerate() {
        let (cx, cy) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in bucket {
                        if points[j].dist(p) <= radius {
                            uf.union(i, j);
                        }
                    }
                }
            }
        }
        grid.entry((cx, cy)).or_default().push(i);
    }
    let mut labels = HashMap::new();
    (0..points.len())
        .map(|i| {
            let root = uf.find(i);
            let next = labels.len();
            *labels.entry(root).or_insert(next)
        })
        .collect()
}

/// Merges nearby segment endpoints into joints and links them by segments.
///
/// Endpoints within `merge_radius` are clustered by single linkage and each
/// cluster becomes one vertex at its centroid. Clustering is repeated on the
/// centroids until no two vertices are within `merge_radius`. Segment ends
/// are snapped onto their vertices; segments whose ends land on the same
/// vertex are dropped.
pub fn build_joint_graph(segments: &[Vec<Point2>], merge_radius: f64) -> JointGraph {
    let segments: Vec<&Vec<Point2>> = segments.iter().filter(|s| s.len() >= 2).collect();
    let endpoints: Vec<Point2> = segments
        .iter()
        .flat_map(|s| [s[0], *s.last().unwrap()])
        .collect();

    // endpoint -> vertex
    let mut assignment: Vec<usize> = (0..endpoints.len()).collect();
    let mut vertices = endpoints.clone();
    loop {
        let labels = single_linkage(&vertices, merge_radius);
        let count = labels.iter().max().map_or(0, |m| m + 1);
        for a in assignment.iter_mut() {
            *a = labels[*a];
        }
        let mut members: Vec<Vec<Point2>> = vec![Vec::new(); count];
        for (e, &v) in assignment.iter().enumerate() {
            members[v].push(endpoints[e]);
        }
        let merged = count < vertices.len();
        vertices = members.into_iter().map(centroid).collect();
        if !merged {
            break;
        }
    }

    let mut edges = Vec::with_capacity(segments.len());
    for (i, seg) in segments.iter().enumerate() {
        let (u, v) = (assignment[2 * i], assignment[2 * i + 1]);
        if u == v {
            continue;
        }
        let mut polyline = (*seg).clone();
        polyline[0] = vertices[u];
        *polyline.last_mut().unwrap() = vertices[v];
        let weight = polyline_length(&polyline);
        if weight > 0.0 && weight.is_finite() {
            edges.push(GraphEdge {
                u,
                v,
                weight,
                polyline,
            });
        }
    }
    JointGraph { vertices, edges }
}

/// One tree of a spanning forest.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanningTree {
    pub vertices: Vec<usize>,
    /// Indices into [`JointGraph::edges`].
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpanningForest {
    pub trees: Vec<SpanningTree>,
}

impl SpanningForest {
    pub fn total_weight(&self, graph: &JointGraph) -> f64 {
        self.trees.iter().map(|t| graph.total_weight(&t.edges)).sum()
    }
}

/// Maximum-weight spanning tree of every connected component (Kruskal on
/// descending weights). Equal weights are taken in edge order. Components
/// without edges are omitted.
pub fn max_spanning_forest(graph: &JointGraph) -> SpanningForest {
    let mut order: Vec<usize> = (0..graph.edges.len()).collect();
    order.sort_by(|&a, &b| graph.edges[b].weight.total_cmp(&graph.edges[a].weight));
    let mut uf = UnionFind::new(graph.vertices.len());
    let mut chosen = Vec::new();
    for e in order {
        let edge = &graph.edges[e];
        if uf.union(edge.u, edge.v) {
            chosen.push(e);
        }
    }
    let mut by_root: HashMap<usize, usize> = HashMap::new();
    let mut trees: Vec<SpanningTree> = Vec::new();
    let mut has_edge = vec![false; graph.vertices.len()];
    for &e in &chosen {
        has_edge[graph.edges[e].u] = true;
        has_edge[graph.edges[e].v] = true;
    }
    for v in 0..graph.vertices.len() {
        if !has_edge[v] {
            continue;
        }
        let root = uf.find(v);
        let t = *by_root.entry(root).or_insert_with(|| {
            trees.push(SpanningTree {
                vertices: Vec::new(),
                edges: Vec::new(),
            });
            trees.len() - 1
        });
        trees[t].vertices.push(v);
    }
    chosen.sort_unstable();
    for e in chosen {
        let t = by_root[&uf.find(graph.edges[e].u)];
        trees[t].edges.push(e);
    }
    SpanningForest { trees }
}
