use std::collections::BTreeMap;

use super::power::StochasticOperator;
use super::OracleError;
use crate::graph::Node;

/// A directed network with non-negative edge weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedNetwork {
    pub vertices: Vec<Node>,
    /// `(from, to)` indices into `vertices`.
    pub weights: BTreeMap<(usize, usize), f64>,
}

impl WeightedNetwork {
    pub fn new(vertices: Vec<Node>) -> Self {
        WeightedNetwork {
            vertices,
            weights: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, from: usize, to: usize, w: f64) {
        *self.weights.entry((from, to)).or_insert(0.0) += w;
    }

    pub fn weight(&self, from: &Node, to: &Node) -> f64 {
        let (Some(a), Some(b)) = (self.position(from), self.position(to)) else {
            return 0.0;
        };
        self.weights.get(&(a, b)).copied().unwrap_or(0.0)
    }

    pub fn position(&self, v: &Node) -> Option<usize> {
        self.vertices.iter().position(|x| x == v)
    }

    pub fn out_weight(&self, from: usize) -> f64 {
        self.weights
            .range((from, 0)..(from + 1, 0))
            .map(|(_, w)| w)
            .sum()
    }
}

/// Row-stochastic matrix over an ordered vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub order: Vec<Node>,
    pub entries: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    /// Checks shape, non-negativity and row sums (± 1e−9).
    pub fn new(order: Vec<Node>, entries: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        let n = order.len();
        if n == 0 {
            return Err(OracleError::NotStochastic("empty matrix".into()));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(OracleError::NotStochastic(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|v| *v < 0.0 || !v.is_finite()) || (sum - 1.0).abs() > 1e-9 {
                return Err(OracleError::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        if entries.len() != n {
            return Err(OracleError::NotStochastic(format!(
                "{} rows, expected {n}",
                entries.len()
            )));
        }
        Ok(TransitionMatrix { order, entries })
    }

    /// Same as [`Self::new`] with placeholder vertex names `urn:v:0…`.
    pub fn from_rows(entries: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        let order = (0..entries.len())
            .map(|i| Node::iri(format!("urn:v:{i}")))
            .collect();
        Self::new(order, entries)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn max_row_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl StochasticOperator for TransitionMatrix {
    fn dim(&self) -> usize {
        self.len()
    }

    fn left_mul(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (xi, row) in x.iter().zip(&self.entries) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += xi * a;
            }
        }
    }

    fn support(&self, i: usize) -> Vec<usize> {
        self.entries[i]
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Rows are out-weights over their sum; a vertex with no out-weight jumps
/// uniformly to every vertex.
pub fn transition_matrix(net: &WeightedNetwork) -> Result<TransitionMatrix, OracleError> {
    let n = net.vertices.len();
    let mut entries = vec![vec![0.0; n]; n];
    for ((a, b), w) in &net.weights {
        entries[*a][*b] += w;
    }
    for row in &mut entries {
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            row.iter_mut().for_each(|v| *v /= sum);
        } else {
            row.fill(1.0 / n as f64);
        }
    }
    TransitionMatrix::new(net.vertices.clone(), entries)
}

/// `δA + (1 − δ)B` with `B` uniform.
pub fn blend_teleport(a: &TransitionMatrix, delta: f64) -> Result<TransitionMatrix, OracleError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(OracleError::BadDelta(delta));
    }
    let jump = (1.0 - delta) / a.len() as f64;
    let entries = a
        .entries
        .iter()
        .map(|row| row.iter().map(|v| delta * v + jump).collect())
        .collect();
    Ok(TransitionMatrix {
        order: a.order.clone(),
        entries,
    })
}
