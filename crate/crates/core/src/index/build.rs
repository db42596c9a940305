use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ChainStore, ChainTree, IndexNode};
use crate::matcher::{chain_score_prepared, SkipCosts};
use crate::params::{MatchParams, Params};

/// Medoids a chain joins: every one scoring at least `th_ms` times its best
/// score. The best is always included.
pub fn assign_by_scores(scores: &[f64], th_ms: f64) -> Vec<usize> {
    let Some(best) = (0..scores.len()).reduce(|b, k| if scores[k] > scores[b] { k } else { b }) else {
        return Vec::new();
    };
    let cut = th_ms * scores[best];
    (0..scores.len())
        .filter(|&k| k == best || scores[k] >= cut)
        .collect()
}

fn image_costs(params: &MatchParams) -> SkipCosts {
    SkipCosts::new(false, params)
}

/// Scores of every member against one medoid.
fn score_row(store: &ChainStore, members: &[u32], medoid: u32, params: &MatchParams) -> Vec<f64> {
    let costs = image_costs(params);
    let m = &store.get(medoid).descriptor;
    members
        .par_iter()
        .map(|&c| chain_score_prepared(store.get(c).descriptor.base(), m, costs, params))
        .collect()
}

/// Assigns `members` to `medoids` given a score row per medoid.
fn assign_rows(members: &[u32], rows: &[Vec<f64>], th_ms: f64) -> Vec<Vec<u32>> {
    let mut clusters = vec![Vec::new(); rows.len()];
    let mut column = vec![0.0; rows.len()];
    for (pos, &c) in members.iter().enumerate() {
        for (k, row) in rows.iter().enumerate() {
            column[k] = row[pos];
        }
        for k in assign_by_scores(&column, th_ms) {
            clusters[k].push(c);
        }
    }
    clusters
}

/// Multi-assignment of `members` (store indices) to `medoids`.
pub fn assign_multi(store: &ChainStore, members: &[u32], medoids: &[u32], th_ms: f64, params: &MatchParams) -> Vec<Vec<u32>> {
    let rows: Vec<Vec<f64>> = medoids.iter().map(|&m| score_row(store, members, m, params)).collect();
    assign_rows(members, &rows, th_ms)
}

fn kpp_scored(
    store: &ChainStore,
    members: &[u32],
    k: usize,
    rng: &mut ChaCha8Rng,
    params: &MatchParams,
) -> (Vec<u32>, Vec<Vec<f64>>) {
    let n = members.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    if n <= k {
        let rows = members.iter().map(|&m| score_row(store, members, m, params)).collect();
        return (members.to_vec(), rows);
    }
    let mut chosen_pos = vec![rng.random_range(0..n)];
    let mut rows = vec![score_row(store, members, members[chosen_pos[0]], params)];
    let mut nearest: Vec<f64> = rows[0].iter().map(|&s| 1.0 / (1.0 + s)).collect();
    let mut is_chosen = vec![false; n];
    is_chosen[chosen_pos[0]] = true;
    while chosen_pos.len() < k {
        let weights: Vec<f64> = (0..n)
            .map(|i| if is_chosen[i] { 0.0 } else { nearest[i] * nearest[i] })
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let mut r = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if r < w {
                        break;
                    }
                    r -= w;
                }
            }
            pick
        } else {
            (0..n).find(|&i| !is_chosen[i])
        };
        let Some(p) = pick else { break };
        is_chosen[p] = true;
        chosen_pos.push(p);
        let row = score_row(store, members, members[p], params);
        for (d, &s) in nearest.iter_mut().zip(&row) {
            *d = d.min(1.0 / (1.0 + s));
        }
        rows.push(row);
    }
    (chosen_pos.iter().map(|&p| members[p]).collect(), rows)
}

/// k-means++ style medoid seeding over `members` (store indices), using
/// `1 / (1 + chain score)` as the distance. Returns store indices.
pub fn kpp_init(store: &ChainStore, members: &[u32], k: usize, rng_seed: u64, params: &MatchParams) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    kpp_scored(store, members, k, &mut rng, params).0
}

/// Moves each medoid to the cluster member with the highest total score to
/// the rest of its cluster.
fn refine(store: &ChainStore, clusters: &[Vec<u32>], medoids: &mut [u32], params: &MatchParams) {
    let costs = image_costs(params);
    for (cluster, medoid) in clusters.iter().zip(medoids.iter_mut()) {
        let totals: Vec<f64> = cluster
            .par_iter()
            .map(|&cand| {
                let m = &store.get(cand).descriptor;
                cluster
                    .iter()
                    .map(|&c| chain_score_prepared(store.get(c).descriptor.base(), m, costs, params))
                    .sum()
            })
            .collect();
        if let Some(best) = (0..cluster.len()).reduce(|b, k| if totals[k] > totals[b] { k } else { b }) {
            *medoid = cluster[best];
        }
    }
}

enum BuildNode {
    Internal(Vec<(u32, BuildNode)>),
    Leaf(Vec<u32>),
}

fn build_node(store: &ChainStore, members: Vec<u32>, depth: usize, seed: u64, params: &Params) -> BuildNode {
    let ip = &params.index;
    if members.len() <= ip.max_leaf || depth >= ip.max_depth {
        return BuildNode::Leaf(members);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = ip.branching;
    let (mut medoids, mut rows) = kpp_scored(store, &members, k, &mut rng, &params.matching);
    let mut clusters = assign_rows(&members, &rows, ip.th_ms);
    for _ in 0..ip.refine_iterations {
        refine(store, &clusters, &mut medoids, &params.matching);
        rows = medoids.iter().map(|&m| score_row(store, &members, m, &params.matching)).collect();
        clusters = assign_rows(&members, &rows, ip.th_ms);
    }
    let keyed: Vec<(u32, Vec<u32>, u64)> = medoids
        .into_iter()
        .zip(clusters)
        .filter(|(_, c)| !c.is_empty())
        .map(|(m, c)| (m, c, rng.random::<u64>()))
        .collect();
    if keyed.len() <= 1 {
        return BuildNode::Leaf(members);
    }
    let total = members.len();
    let children = keyed
        .into_par_iter()
        .map(|(m, cluster, child_seed)| {
            let child = if cluster.len() >= total || cluster.len() as f64 > ip.shrink_ratio * total as f64 {
                BuildNode::Leaf(cluster)
            } else {
                build_node(store, cluster, depth + 1, child_seed, params)
            };
            (m, child)
        })
        .collect();
    BuildNode::Internal(children)
}

fn flatten(node: BuildNode, out: &mut Vec<IndexNode>) -> u32 {
    let idx = out.len() as u32;
    match node {
        BuildNode::Leaf(chains) => out.push(IndexNode::Leaf { chains }),
        BuildNode::Internal(children) => {
            out.push(IndexNode::Internal { children: Vec::new() });
            let mut keyed = Vec::with_capacity(children.len());
            for (m, child) in children {
                keyed.push((m, flatten(child, out)));
            }
            out[idx as usize] = IndexNode::Internal { children: keyed };
        }
    }
    idx
}

/// Recursively clusters the store. Depth is counted from the root at 1;
/// recursion also stops when multi-assignment leaves a cluster holding more
/// than `shrink_ratio` of its parent. The same store, parameters and seed
/// give the same tree.
pub fn build_tree(store: ChainStore, params: &Params, seed: u64) -> ChainTree {
    let mut nodes = Vec::new();
    if !store.is_empty() {
        let members: Vec<u32> = (0..store.len() as u32).collect();
        let root = build_node(&store, members, 1, seed, params);
        flatten(root, &mut nodes);
    }
    ChainTree {
        store,
        nodes,
        params: params.clone(),
        seed,
    }
}
