use std::collections::BTreeMap;

use crate::graph::NodeId;

/// Proportional rescaling to a distribution. Empty or all-zero input gives
/// an empty map.
pub fn normalize<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> BTreeMap<K, f64> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return BTreeMap::new();
    }
    counts
        .iter()
        .filter(|(_, c)| **c > 0)
        .map(|(k, c)| (k.clone(), *c as f64 / total as f64))
        .collect()
}

/// Euclidean distance over the union of supports, missing entries read as 0.
pub fn l2_distance<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    union_diffs(a, b).map(|d| d * d).sum::<f64>().sqrt()
}

/// L1 distance over the union of supports.
pub fn l1_distance<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    union_diffs(a, b).map(f64::abs).sum()
}

fn union_diffs<'a, K: Ord>(
    a: &'a BTreeMap<K, f64>,
    b: &'a BTreeMap<K, f64>,
) -> impl Iterator<Item = f64> + 'a {
    let only_b = b
        .iter()
        .filter(|(k, _)| !a.contains_key(k))
        .map(|(_, v)| *v);
    a.iter()
        .map(|(k, v)| v - b.get(k).copied().unwrap_or(0.0))
        .chain(only_b)
}

pub fn has_converged<K: Ord>(
    prev: &BTreeMap<K, f64>,
    curr: &BTreeMap<K, f64>,
    epsilon: f64,
) -> bool {
    l2_distance(prev, curr) < epsilon
}

/// Global visit counts π.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankVector {
    counts: BTreeMap<NodeId, u64>,
}

impl RankVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> &BTreeMap<NodeId, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Adds a walker's local counts.
    pub fn submit(&mut self, local: &BTreeMap<NodeId, u64>) {
        for (v, c) in local {
            if *c > 0 {
                *self.counts.entry(*v).or_insert(0) += c;
            }
        }
    }

    pub fn normalized(&self) -> BTreeMap<NodeId, f64> {
        normalize(&self.counts)
    }
}
