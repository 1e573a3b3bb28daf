//! Exact reference results for small inputs: the walker process expanded
//! into an explicit Markov chain and solved by power iteration.

mod chain;
mod compare;
mod implied;
mod matrix;
mod power;

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::grammar::{Diagnostic, Grammar};
use crate::graph::{Node, SemanticNetwork};
use crate::output;

pub use chain::{expand_chain, ChainOptions, ChainState, EdgeRef, ExpandedChain, Slot, Teleport};
pub use compare::{compare_rankings, compare_rankings_with, ranking, Comparison};
pub use implied::{implied_network, is_aperiodic};
pub use matrix::{blend_teleport, transition_matrix, TransitionMatrix, WeightedNetwork};
pub use power::{
    closed_classes, period, power_iteration, power_iteration_from, PowerOptions, PowerResult,
    SparseRows, StochasticOperator,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grammar has {} error(s)", .0.len())]
    InvalidGrammar(Vec<Diagnostic>),
    #[error("grammar cannot run on this network: {0}")]
    Unrunnable(String),
    #[error("walkers can halt in context {context}: {reason}")]
    UnsupportedGrammar { context: String, reason: String },
    #[error("chain exceeds {max_states} states")]
    Capacity { max_states: usize },
    #[error("teleport weight {0} is outside (0, 1]")]
    BadDelta(f64),
    #[error("not a stochastic matrix: {0}")]
    NotStochastic(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub max_states: usize,
    pub power: PowerOptions,
    /// Solve the implied network blended with uniform teleportation at this
    /// weight, ignoring Reresolve rules, instead of the exact chain.
    pub delta: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_states: 100_000,
            power: PowerOptions::default(),
            delta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub normalized: BTreeMap<Node, f64>,
    pub states: usize,
    pub strongly_connected: bool,
    pub aperiodic: bool,
    pub converged: bool,
    pub iterations: usize,
}

impl OracleReport {
    pub fn distribution(&self) -> BTreeMap<String, f64> {
        self.normalized.iter().map(|(k, v)| (k.key(), *v)).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "aperiodic": self.aperiodic,
            "normalized": output::distribution_json(&self.distribution()),
            "states": self.states,
            "strongly_connected": self.strongly_connected,
        })
    }
}

/// Stationary share of counts per vertex for `g` on `net`.
pub fn solve(
    net: &SemanticNetwork,
    g: &Grammar,
    cfg: &OracleConfig,
) -> Result<OracleReport, OracleError> {
    if let Some(d) = cfg.delta {
        if !(d > 0.0 && d <= 1.0) {
            return Err(OracleError::BadDelta(d));
        }
    }
    let teleport = if cfg.delta.is_some() {
        Teleport::Ignore
    } else {
        Teleport::Exact
    };
    let chain = expand_chain(
        net,
        g,
        &ChainOptions {
            max_states: cfg.max_states,
            teleport,
        },
    )?;
    let stationary = chain.stationary(&cfg.power);
    let implied = implied_network(&chain, &stationary.distribution);
    let aperiodic = is_aperiodic(&implied);
    let strongly_connected = chain.strongly_connected();

    let (normalized, converged, iterations) = match cfg.delta {
        None => (
            chain.counted_distribution(&stationary.distribution),
            stationary.converged,
            stationary.iterations,
        ),
        Some(d) => {
            if implied.vertices.is_empty() {
                (BTreeMap::new(), true, 0)
            } else {
                let c = blend_teleport(&transition_matrix(&implied)?, d)?;
                let r = power_iteration(&c, &cfg.power);
                let dist = c.order.iter().cloned().zip(r.distribution).collect();
                (dist, r.converged, r.iterations)
            }
        }
    };
    Ok(OracleReport {
        normalized,
        states: chain.len(),
        strongly_connected,
        aperiodic,
        converged,
        iterations,
    })
}
