use std::collections::{BTreeMap, BTreeSet};

use super::chain::ExpandedChain;
use super::matrix::WeightedNetwork;
use super::power::{closed_classes, period, SparseRows};

/// Collapses the chain onto its counted vertices: the weight of `v → v'`
/// is the probability that the next count after one at `v` lands on `v'`,
/// averaged over `v`'s counted states by their long-run mass.
pub fn implied_network(chain: &ExpandedChain, mass: &[f64]) -> WeightedNetwork {
    let vertices: Vec<_> = chain
        .counted
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos: BTreeMap<_, _> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();

    let mut by_vertex: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, v) in chain.counted.iter().enumerate() {
        if let Some(v) = v {
            by_vertex.entry(pos[v]).or_default().push(s);
        }
    }

    let mut net = WeightedNetwork::new(vertices);
    for (v, states) in by_vertex {
        let total: f64 = states.iter().map(|s| mass[*s]).sum();
        let weight = |s: usize| {
            if total > 0.0 {
                mass[s] / total
            } else {
                1.0 / states.len() as f64
            }
        };
        for &s in &states {
            let w = weight(s);
            if w == 0.0 {
                continue;
            }
            for (t, h) in next_count(chain, s) {
                let target = pos[chain.counted[t]
                    .as_ref()
                    .expect("absorbed in a counted state")];
                net.add(v, target, w * h);
            }
        }
    }
    net
}

/// Distribution of the first counted state reached after leaving `s`.
fn next_count(chain: &ExpandedChain, s: usize) -> BTreeMap<usize, f64> {
    let mut hit = BTreeMap::new();
    let mut live: BTreeMap<usize, f64> = BTreeMap::new();
    for (t, p) in &chain.transitions[s] {
        *live.entry(*t).or_insert(0.0) += p;
    }
    for _ in 0..100_000 {
        let mut next = BTreeMap::new();
        for (t, p) in live {
            if chain.counted[t].is_some() {
                *hit.entry(t).or_insert(0.0) += p;
            } else {
                for (u, q) in &chain.transitions[t] {
                    *next.entry(*u).or_insert(0.0) += p * q;
                }
            }
        }
        live = next;
        if live.values().sum::<f64>() < 1e-15 {
            break;
        }
    }
    hit
}

/// True iff every closed class of the weighted network is aperiodic.
pub fn is_aperiodic(net: &WeightedNetwork) -> bool {
    let mut rows = vec![Vec::new(); net.vertices.len()];
    for ((a, b), w) in &net.weights {
        if *w > 0.0 {
            rows[*a].push((*b, *w));
        }
    }
    let m = SparseRows::new(rows);
    closed_classes(&m).iter().all(|c| period(&m, c) == 1)
}
