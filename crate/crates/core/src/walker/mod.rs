//! Grammar-constrained random walkers.

mod ops;
mod program;
mod rank;
mod run;
mod state;

use thiserror::Error;

use crate::grammar::Diagnostic;

pub use ops::{
    apply_reresolve, apply_traverse, constraint_sets, incr_count, reresolve_paths, spawn_walker,
    step, submit_counts, traversal_candidates, Candidate, StepOutcome,
};
pub use program::{Path, Program};
pub use rank::{has_converged, l1_distance, l2_distance, normalize, RankVector};
pub use run::{run, run_with, RunConfig, RunResult, RunStats, Start, WalkObserver};
pub use state::{HistoryEntry, StepRecord, WalkerState};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("grammar has {} error(s): {}", .0.len(), first(.0))]
    InvalidGrammar(Vec<Diagnostic>),
    #[error("grammar cannot run on this network: {0}")]
    Unrunnable(String),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
}

fn first(d: &[Diagnostic]) -> String {
    d.first().map(ToString::to_string).unwrap_or_default()
}
