use std::collections::{BTreeMap, VecDeque};

use super::program::Program;
use crate::grammar::Direction;
use crate::graph::{Node, NodeId};

/// One time step of a walker: where it is in the network and in the
/// grammar, and how it got there. The direction is shared by both
/// histories, so they always agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub vertex: NodeId,
    /// Predicate of the traversed triple; `None` at entry.
    pub label: Option<NodeId>,
    pub context: usize,
    /// Bound grammar edge that was followed; `None` at entry.
    pub via: Option<usize>,
    pub direction: Option<Direction>,
}

/// `(vertex or context, label, direction)` as shown in traces.
pub type HistoryEntry = (Node, Option<Node>, Option<Direction>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkerState {
    records: VecDeque<StepRecord>,
    /// Absolute time index of `records[0]`.
    first: usize,
    keep: Option<usize>,
    local: BTreeMap<NodeId, u64>,
    cursor: usize,
}

impl WalkerState {
    pub(crate) fn new(entry: StepRecord, keep: Option<usize>) -> Self {
        let mut records = VecDeque::with_capacity(keep.unwrap_or(8).min(64));
        records.push_back(entry);
        WalkerState {
            records,
            first: 0,
            keep,
            local: BTreeMap::new(),
            cursor: 0,
        }
    }

    /// Current time index `n` (0 at entry).
    pub fn time(&self) -> usize {
        self.first + self.records.len() - 1
    }

    pub fn current(&self) -> &StepRecord {
        self.records
            .back()
            .expect("a walker always has a current record")
    }

    pub fn vertex(&self) -> NodeId {
        self.current().vertex
    }

    pub fn context(&self) -> usize {
        self.current().context
    }

    /// Index of the next rule to run in the current context.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Record at absolute time `k`, if retained.
    pub fn at(&self, k: usize) -> Option<&StepRecord> {
        k.checked_sub(self.first).and_then(|i| self.records.get(i))
    }

    /// Retained records, oldest first, with their absolute time index.
    pub fn records(&self) -> impl Iterator<Item = (usize, &StepRecord)> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| (self.first + i, r))
    }

    /// Number of retained records (equal for both histories).
    pub fn retained(&self) -> usize {
        self.records.len()
    }

    /// Local counts; every stored value is positive.
    pub fn local_counts(&self) -> &BTreeMap<NodeId, u64> {
        &self.local
    }

    /// Retained part of g^p.
    pub fn g_history(&self, p: &Program<'_>) -> Vec<HistoryEntry> {
        let net = p.network();
        self.records
            .iter()
            .map(|r| {
                (
                    net.node(r.vertex).clone(),
                    r.label.map(|l| net.node(l).clone()),
                    r.direction,
                )
            })
            .collect()
    }

    /// Retained part of ψ^p.
    pub fn psi_history(&self, p: &Program<'_>) -> Vec<HistoryEntry> {
        let contexts = p.grammar().contexts();
        self.records
            .iter()
            .map(|r| {
                (
                    contexts[r.context].id.clone(),
                    r.via.map(|e| p.edge_def(e).predicate.clone()),
                    r.direction,
                )
            })
            .collect()
    }

    pub(crate) fn push(&mut self, record: StepRecord) {
        self.records.push_back(record);
        if let Some(keep) = self.keep {
            while self.records.len() > keep {
                self.records.pop_front();
                self.first += 1;
            }
        }
        self.cursor = 0;
    }

    pub(crate) fn record_mut(&mut self, k: usize) -> &mut StepRecord {
        let i = k - self.first;
        &mut self.records[i]
    }

    pub(crate) fn advance_cursor(&mut self) {
        self.cursor += 1;
    }

    pub(crate) fn increment(&mut self, v: NodeId) {
        *self.local.entry(v).or_insert(0) += 1;
    }

    pub(crate) fn take_counts(&mut self) -> BTreeMap<NodeId, u64> {
        std::mem::take(&mut self.local)
    }
}
