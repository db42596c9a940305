//! Scoring leaf-to-leaf paths of the spanning forest and picking the best
//! overlapping chains.

use std::collections::HashSet;
use std::f64::consts::PI;

use super::curvature::angle_at;
use super::graph::{JointGraph, SpanningForest};
use crate::error::Result;
use crate::model::{Chain, ChainSource, Point2};
use crate::params::ExtractionParams;

/// A selected path through the joint graph with its score.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredChain {
    /// Vertex indices along the path.
    pub vertices: Vec<usize>,
    /// Graph edge indices along the path.
    pub edges: Vec<usize>,
    pub joints: Vec<Point2>,
    pub score: f64,
}

impl ScoredChain {
    pub fn length(&self) -> f64 {
        self.joints.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    pub fn into_chain(self, image_id: &str, chain_id: &str, source: ChainSource) -> Result<Chain> {
        Chain::new(image_id, chain_id, source, self.joints)
    }
}

/// Length-weighted smoothness score of paths in a joint graph.
///
/// A path scores the sum of its joint-to-joint distances plus, at every
/// interior joint, a bonus of `λ_l/2 · share · (incoming + outgoing distance)`.
/// The share is the smoothness `exp(-λ_s·|π - angle|)` of the path's turn
/// divided by the summed smoothness of every continuation available in the
/// graph at that joint. The share is averaged over both travel directions so
/// a path scores the same either way round.
pub struct ChainScorer<'g> {
    graph: &'g JointGraph,
    adjacency: Vec<Vec<(usize, usize)>>,
    lambda_l: f64,
    lambda_s: f64,
}

impl<'g> ChainScorer<'g> {
    pub fn new(graph: &'g JointGraph, lambda_l: f64, lambda_s: f64) -> Self {
        Self {
            graph,
            adjacency: graph.adjacency(),
            lambda_l,
            lambda_s,
        }
    }

    fn pos(&self, v: usize) -> Point2 {
        self.graph.vertices[v]
    }

    fn dis(&self, a: usize, b: usize) -> f64 {
        self.pos(a).dist(self.pos(b))
    }

    fn smooth(&self, a: usize, b: usize, c: usize) -> f64 {
        (-self.lambda_s * (PI - angle_at(self.pos(a), self.pos(b), self.pos(c))).abs()).exp()
    }

    /// Share of the turn `from → joint → to` among all continuations out of
    /// `joint` when arriving from `from`.
    fn directed_share(&self, from: usize, joint: usize, to: usize) -> f64 {
        let total: f64 = self.adjacency[joint]
            .iter()
            .filter(|&&(x, _)| x != from)
            .map(|&(x, _)| self.smooth(from, joint, x))
            .sum();
        let own = self.smooth(from, joint, to);
        if total > 0.0 {
            own / total
        } else {
            1.0
        }
    }

    pub fn share(&self, prev: usize, joint: usize, next: usize) -> f64 {
        0.5 * (self.directed_share(prev, joint, next) + self.directed_share(next, joint, prev))
    }

    /// Bonus contributed by interior joint `joint` between `prev` and `next`.
    pub fn joint_bonus(&self, prev: usize, joint: usize, next: usize) -> f64 {
        0.5 * self.lambda_l
            * self.share(prev, joint, next)
            * (self.dis(prev, joint) + self.dis(joint, next))
    }

    /// Score of a simple path given as a vertex sequence.
    pub fn score(&self, path: &[usize]) -> f64 {
        let base: f64 = path.windows(2).map(|w| self.dis(w[0], w[1])).sum();
        let bonus: f64 = path
            .windows(3)
            .map(|w| self.joint_bonus(w[0], w[1], w[2]))
            .sum();
        base + bonus
    }
}

/// Scores one path; see [`ChainScorer`].
pub fn score_chain(path: &[usize], graph: &JointGraph, lambda_l: f64, lambda_s: f64) -> f64 {
    ChainScorer::new(graph, lambda_l, lambda_s).score(path)
}

/// A spanning tree rooted for lowest-common-ancestor path scoring.
struct RootedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    parent_edge: Vec<usize>,
    depth: Vec<usize>,
    /// Score of the root-to-vertex path, excluding the bonus at the root and
    /// at the vertex itself.
    prefix: Vec<f64>,
    /// Bonus at the parent joint between grandparent and this vertex.
    link_bonus: Vec<f64>,
    leaves: Vec<usize>,
}

impl RootedTree {
    fn build(scorer: &ChainScorer, vertices: &[usize], edges: &[usize]) -> Self {
        let graph = scorer.graph;
        let n = graph.vertices.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for &e in edges {
            let ed = &graph.edges[e];
            adj[ed.u].push((ed.v, e));
            adj[ed.v].push((ed.u, e));
        }
        let root = vertices
            .iter()
            .copied()
            .find(|&v| adj[v].len() >= 2)
            .unwrap_or(vertices[0]);
        let mut parent = vec![None; n];
        let mut parent_edge = vec![usize::MAX; n];
        let mut depth = vec![0; n];
        let mut prefix = vec![0.0; n];
        let mut link_bonus = vec![0.0; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &(v, e) in &adj[u] {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                parent[v] = Some(u);
                parent_edge[v] = e;
                depth[v] = depth[u] + 1;
                link_bonus[v] = parent[u].map_or(0.0, |g| scorer.joint_bonus(g, u, v));
                prefix[v] = prefix[u] + scorer.dis(u, v) + link_bonus[v];
                stack.push(v);
            }
        }
        let mut leaves: Vec<usize> = vertices.iter().copied().filter(|&v| adj[v].len() == 1).collect();
        leaves.sort_unstable();
        Self {
            root,
            parent,
            parent_edge,
            depth,
            prefix,
            link_bonus,
            leaves,
        }
    }

    /// Lowest common ancestor of `a` and `b`, plus the child of it on the way
    /// to each (`None` when that endpoint is the ancestor itself).
    fn lca(&self, a: usize, b: usize) -> (usize, Option<usize>, Option<usize>) {
        let (mut x, mut y) = (a, b);
        let (mut cx, mut cy) = (None, None);
        while self.depth[x] > self.depth[y] {
            cx = Some(x);
            x = self.parent[x].unwrap();
        }
        while self.depth[y] > self.depth[x] {
            cy = Some(y);
            y = self.parent[y].unwrap();
        }
        while x != y {
            cx = Some(x);
            cy = Some(y);
            x = self.parent[x].unwrap();
            y = self.parent[y].unwrap();
        }
        (x, cx, cy)
    }

    fn path_score(&self, scorer: &ChainScorer, a: usize, b: usize) -> f64 {
        let (c, ca, cb) = self.lca(a, b);
        let side = |leaf: usize, child: Option<usize>| match child {
            Some(ch) => self.prefix[leaf] - self.prefix[c] - self.link_bonus[ch],
            None => 0.0,
        };
        let apex = match (ca, cb) {
            (Some(x), Some(y)) => scorer.joint_bonus(x, c, y),
            _ => 0.0,
        };
        side(a, ca) + side(b, cb) + apex
    }

    /// Vertices and edges from `a` to `b`.
    fn path(&self, a: usize, b: usize) -> (Vec<usize>, Vec<usize>) {
        let (c, _, _) = self.lca(a, b);
        let mut up_a = vec![a];
        let mut edges_a = Vec::new();
        let mut x = a;
        while x != c {
            edges_a.push(self.parent_edge[x]);
            x = self.parent[x].unwrap();
            up_a.push(x);
        }
        let mut up_b = Vec::new();
        let mut edges_b = Vec::new();
        let mut y = b;
        while y != c {
            up_b.push(y);
            edges_b.push(self.parent_edge[y]);
            y = self.parent[y].unwrap();
        }
        up_b.reverse();
        edges_b.reverse();
        up_a.extend(up_b);
        edges_a.extend(edges_b);
        (up_a, edges_a)
    }
}

struct Candidate {
    tree: usize,
    a: usize,
    b: usize,
    score: f64,
}

/// Scores every leaf-to-leaf path of every tree and greedily keeps the best
/// `n_oc` that do not overlap too much.
///
/// Path scores come from root-to-vertex prefix sums split at the lowest
/// common ancestor. A candidate is rejected when its shared length with any
/// selected chain reaches `overlap_threshold` of the shorter of the two, or
/// when the selected chains together already cover that fraction of it.
pub fn extract_top_chains(
    forest: &SpanningForest,
    graph: &JointGraph,
    params: &ExtractionParams,
) -> Vec<ScoredChain> {
    let scorer = ChainScorer::new(graph, params.lambda_l, params.lambda_s);
    let rooted: Vec<RootedTree> = forest
        .trees
        .iter()
        .map(|t| RootedTree::build(&scorer, &t.vertices, &t.edges))
        .collect();

    let mut candidates = Vec::new();
    for (ti, tree) in rooted.iter().enumerate() {
        debug_assert!(tree.parent[tree.root].is_none());
        for (i, &a) in tree.leaves.iter().enumerate() {
            for &b in &tree.leaves[i + 1..] {
                candidates.push(Candidate {
                    tree: ti,
                    a,
                    b,
                    score: tree.path_score(&scorer, a, b),
                });
            }
        }
    }
    candidates.sort_by(|x, y| y.score.total_cmp(&x.score));

    let edge_len = |e: usize| {
        let ed = &graph.edges[e];
        graph.vertices[ed.u].dist(graph.vertices[ed.v])
    };
    let mut selected: Vec<(ScoredChain, HashSet<usize>, f64)> = Vec::new();
    let mut covered: HashSet<usize> = HashSet::new();
    for cand in candidates {
        if selected.len() >= params.n_oc {
            break;
        }
        let (vertices, edges) = rooted[cand.tree].path(cand.a, cand.b);
        let own: HashSet<usize> = edges.iter().copied().collect();
        let len: f64 = edges.iter().map(|&e| edge_len(e)).sum();
        if !(len > 0.0) {
            continue;
        }
        let shared = |other: &HashSet<usize>| -> f64 {
            own.intersection(other).map(|&e| edge_len(e)).sum()
        };
        let too_close = selected
            .iter()
            .any(|(_, s, slen)| shared(s) / len.min(*slen) >= params.overlap_threshold)
            || shared(&covered) / len >= params.overlap_threshold;
        if too_close {
            continue;
        }
        covered.extend(own.iter().copied());
        let joints = vertices.iter().map(|&v| graph.vertices[v]).collect();
        selected.push((
            ScoredChain {
                vertices,
                edges,
                joints,
                score: cand.score,
            },
            own,
            len,
        ));
    }
    selected.into_iter().map(|(c, _, _)| c).collect()
}
