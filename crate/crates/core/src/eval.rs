//! Precision-at-K evaluation over labeled queries.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

/// Fraction of the first `k` retrieved ids labeled `category`. Missing ranks
/// and unlabeled images count as misses.
pub fn precision_at_k(ranked: &[String], labels: &HashMap<String, String>, category: &str, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let hits = ranked
        .iter()
        .take(k)
        .filter(|id| match labels.get(id.as_str()) {
            Some(c) => c == category,
            None => {
                log::warn!("image {id} has no label; counted as a miss");
                false
            }
        })
        .count();
    hits as f64 / k as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryPrecision {
    pub query: String,
    pub category: String,
    /// Precision by rank level.
    pub precision: BTreeMap<usize, f64>,
}

/// Best, worst and average precision of one category at one rank level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub best: f64,
    pub worst: f64,
    pub average: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Self {
            best: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            worst: values.iter().copied().fold(f64::INFINITY, f64::min),
            average: values.iter().sum::<f64>() / values.len() as f64,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub levels: Vec<usize>,
    pub queries: Vec<QueryPrecision>,
    /// category -> level -> aggregate
    pub categories: BTreeMap<String, BTreeMap<usize, Aggregate>>,
    /// Mean over all queries, by level.
    pub overall: BTreeMap<usize, f64>,
}

impl EvalReport {
    pub fn new(levels: &[usize], queries: Vec<QueryPrecision>) -> Self {
        let mut categories: BTreeMap<String, BTreeMap<usize, Aggregate>> = BTreeMap::new();
        let mut overall = BTreeMap::new();
        for &k in levels {
            let mut by_cat: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            let mut all = Vec::new();
            for q in &queries {
                if let Some(&p) = q.precision.get(&k) {
                    by_cat.entry(q.category.as_str()).or_default().push(p);
                    all.push(p);
                }
            }
            for (cat, vals) in by_cat {
                if let Some(a) = Aggregate::of(&vals) {
                    categories.entry(cat.to_string()).or_default().insert(k, a);
                }
            }
            if let Some(a) = Aggregate::of(&all) {
                overall.insert(k, a.average);
            }
        }
        Self {
            levels: levels.to_vec(),
            queries,
            categories,
            overall,
        }
    }

    /// Plain-text table: one row per category with B/W/A per level.
    pub fn to_table(&self) -> String {
        let mut s = String::from("category");
        for k in &self.levels {
            let _ = write!(s, "\t@{k} B/W/A");
        }
        s.push('\n');
        for (cat, by_level) in &self.categories {
            s.push_str(cat);
            for k in &self.levels {
                match by_level.get(k) {
                    Some(a) => {
                        let _ = write!(s, "\t{:.3}/{:.3}/{:.3}", a.best, a.worst, a.average);
                    }
                    None => s.push_str("\t-"),
                }
            }
            s.push('\n');
        }
        s.push_str("all");
        for k in &self.levels {
            match self.overall.get(k) {
                Some(v) => {
                    let _ = write!(s, "\t{v:.3}");
                }
                None => s.push_str("\t-"),
            }
        }
        s.push('\n');
        s
    }
}
