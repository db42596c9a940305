//! Hierarchical k-medoids tree over every database chain descriptor.

mod build;
mod io;

pub use build::{assign_by_scores, assign_multi, build_tree, kpp_init};
pub use io::{load_index, read_index, save_index, write_index, IndexManifest, FORMAT_VERSION, MAGIC};

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::descriptor::PreparedDescriptor;
use crate::error::Result;
use crate::matcher::{chain_score_prepared, SkipCosts};
use crate::model::{ChainDescriptor, ChainSource};
use crate::params::{MatchParams, Params};

/// Chain scores already computed for one query, by store index.
pub type ScoreCache = HashMap<u32, f64>;

/// One database chain as held by the index.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredChain {
    pub image_id: String,
    pub chain_id: String,
    pub source: ChainSource,
    pub descriptor: PreparedDescriptor,
}

/// All database chains, in ingestion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChainStore {
    chains: Vec<StoredChain>,
}

impl ChainStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates and adds a descriptor; returns its store index.
    pub fn push(
        &mut self,
        image_id: impl Into<String>,
        chain_id: impl Into<String>,
        source: ChainSource,
        descriptor: ChainDescriptor,
    ) -> Result<u32> {
        descriptor.validate()?;
        let idx = u32::try_from(self.chains.len())
            .map_err(|_| crate::error::Error::invalid("chain store is full"))?;
        self.chains.push(StoredChain {
            image_id: image_id.into(),
            chain_id: chain_id.into(),
            source,
            descriptor: PreparedDescriptor::new(descriptor),
        });
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn get(&self, idx: u32) -> &StoredChain {
        &self.chains[idx as usize]
    }

    pub fn chains(&self) -> &[StoredChain] {
        &self.chains
    }

    /// Store indices grouped by image, images in first-appearance order.
    pub fn by_image(&self) -> Vec<(String, Vec<u32>)> {
        let mut order: Vec<(String, Vec<u32>)> = Vec::new();
        let mut pos: HashMap<&str, usize> = HashMap::new();
        for (i, c) in self.chains.iter().enumerate() {
            let slot = *pos.entry(c.image_id.as_str()).or_insert_with(|| {
                order.push((c.image_id.clone(), Vec::new()));
                order.len() - 1
            });
            order[slot].1.push(i as u32);
        }
        order
    }

    pub fn image_count(&self) -> usize {
        self.by_image().len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IndexNode {
    /// Children keyed by the store index of their medoid.
    Internal { children: Vec<(u32, u32)> },
    /// Member chains by store index.
    Leaf { chains: Vec<u32> },
}

/// Built index: the chain store plus tree nodes in depth-first preorder, so
/// the root is node 0 and every child comes after its parent.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTree {
    pub store: ChainStore,
    pub nodes: Vec<IndexNode>,
    pub params: Params,
    pub seed: u64,
}

/// One retrieved database chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchHit {
    pub image_id: String,
    /// Store index of the best-scoring chain of this image.
    pub chain: u32,
    /// Chain score of the query against that chain.
    pub score: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct TreeStats {
    pub chains: usize,
    pub images: usize,
    pub nodes: usize,
    pub leaves: usize,
    pub depth: usize,
    /// Leaf memberships; exceeds `chains` when chains sit in several leaves.
    pub leaf_entries: usize,
}

struct Frontier {
    score: f64,
    seq: usize,
    node: u32,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // Highest score first, then earliest pushed.
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl ChainTree {
    pub fn match_params(&self) -> &MatchParams {
        &self.params.matching
    }

    /// Best-first search for database chains similar to `query`.
    ///
    /// Descends towards the most similar medoid, queueing the siblings, and
    /// scores every chain of each leaf reached. Stops once `target_images`
    /// distinct images have been seen or the frontier is empty. Hits are
    /// deduplicated by image (best chain kept) and sorted by descending score,
    /// then image id.
    pub fn search(&self, query: &ChainDescriptor, target_images: usize, costs: SkipCosts) -> Vec<SearchHit> {
        self.search_cached(query, target_images, costs, &mut ScoreCache::new())
    }

    /// [`ChainTree::search`] that reads and fills `cache`, so a chain held by
    /// several leaves is scored once.
    pub fn search_cached(
        &self,
        query: &ChainDescriptor,
        target_images: usize,
        costs: SkipCosts,
        cache: &mut ScoreCache,
    ) -> Vec<SearchHit> {
        let mut best: HashMap<u32, (f64, u32)> = HashMap::new();
        let mut image_of: HashMap<&str, u32> = HashMap::new();
        if self.nodes.is_empty() || target_images == 0 {
            return Vec::new();
        }
        let params = &self.params.matching;
        let mut frontier = BinaryHeap::new();
        let mut seq = 0usize;
        let mut current = Some(0u32);
        while let Some(mut node) = current.take() {
            loop {
                match &self.nodes[node as usize] {
                    IndexNode::Internal { children } => {
                        let scored: Vec<(f64, u32)> = children
                            .iter()
                            .map(|&(medoid, child)| {
                                let s = *cache.entry(medoid).or_insert_with(|| {
                                    chain_score_prepared(query, &self.store.get(medoid).descriptor, costs, params)
                                });
                                (s, child)
                            })
                            .collect();
                        let Some(top) = (0..scored.len()).reduce(|t, k| if scored[k].0 > scored[t].0 { k } else { t })
                        else {
                            break;
                        };
                        for (k, &(score, child)) in scored.iter().enumerate() {
                            if k != top {
                                frontier.push(Frontier { score, seq, node: child });
                                seq += 1;
                            }
                        }
                        node = scored[top].1;
                    }
                    IndexNode::Leaf { chains } => {
                        for &c in chains {
                            let stored = self.store.get(c);
                            let next_id = image_of.len() as u32;
                            let img = *image_of.entry(stored.image_id.as_str()).or_insert(next_id);
                            let s = *cache
                                .entry(c)
                                .or_insert_with(|| chain_score_prepared(query, &stored.descriptor, costs, params));
                            let e = best.entry(img).or_insert((f64::NEG_INFINITY, c));
                            if s > e.0 || (s == e.0 && c < e.1) {
                                *e = (s, c);
                            }
                        }
                        break;
                    }
                }
            }
            if best.len() >= target_images {
                break;
            }
            current = frontier.pop().map(|f| f.node);
        }
        let mut hits: Vec<SearchHit> = best
            .into_values()
            .map(|(score, chain)| SearchHit {
                image_id: self.store.get(chain).image_id.clone(),
                chain,
                score,
            })
            .collect();
        hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.image_id.cmp(&b.image_id)));
        hits
    }

    /// Linear scan over the whole store, in the same output form as
    /// [`ChainTree::search`].
    pub fn exhaustive(&self, query: &ChainDescriptor, costs: SkipCosts) -> Vec<SearchHit> {
        exhaustive_scan(&self.store, query, costs, &self.params.matching)
    }

    pub fn stats(&self) -> TreeStats {
        let mut stats = TreeStats {
            chains: self.store.len(),
            images: self.store.image_count(),
            nodes: self.nodes.len(),
            ..Default::default()
        };
        let mut stack = vec![(0u32, 1usize)];
        while let Some((n, d)) = stack.pop() {
            let Some(node) = self.nodes.get(n as usize) else { break };
            stats.depth = stats.depth.max(d);
            match node {
                IndexNode::Internal { children } => stack.extend(children.iter().map(|&(_, c)| (c, d + 1))),
                IndexNode::Leaf { chains } => {
                    stats.leaves += 1;
                    stats.leaf_entries += chains.len();
                }
            }
        }
        stats
    }
}

/// Scores `query` against every stored chain; best chain per image, sorted by
/// descending score then image id.
pub fn exhaustive_scan(store: &ChainStore, query: &ChainDescriptor, costs: SkipCosts, params: &MatchParams) -> Vec<SearchHit> {
    use rayon::prelude::*;
    let scores: Vec<f64> = store
        .chains()
        .par_iter()
        .map(|c| chain_score_prepared(query, &c.descriptor, costs, params))
        .collect();
    let mut hits: Vec<SearchHit> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for (i, (c, &s)) in store.chains().iter().zip(&scores).enumerate() {
        match slot.get(c.image_id.as_str()) {
            Some(&k) => {
                if s > hits[k].score {
                    hits[k].score = s;
                    hits[k].chain = i as u32;
                }
            }
            None => {
                slot.insert(c.image_id.as_str(), hits.len());
                hits.push(SearchHit {
                    image_id: c.image_id.clone(),
                    chain: i as u32,
                    score: s,
                });
            }
        }
    }
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.image_id.cmp(&b.image_id)));
    hits
}
