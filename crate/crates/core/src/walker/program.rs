use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use super::state::{StepRecord, WalkerState};
use super::RunError;
use crate::grammar::{validate_grammar, AttributeKind, Direction, Grammar, GrammarEdge, Rule};
use crate::graph::{Node, NodeId, SemanticNetwork};
use crate::vocab;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PredicateMatch {
    Any,
    Sub(NodeId),
    /// The grammar names a predicate the network never uses.
    Missing,
}

#[derive(Clone, Debug)]
pub(crate) struct BoundEdge {
    pub direction: Direction,
    pub predicate: PredicateMatch,
    pub target: usize,
    /// Position in the grammar: (context, rule, edge).
    pub source: (usize, usize, usize),
}

#[derive(Clone, Debug)]
pub(crate) enum BoundRule {
    Traverse(Vec<usize>),
    IncrCount,
    SubmitCounts,
    Reresolve {
        probability: f64,
        steps: usize,
        obey_is: bool,
        obey_not: bool,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct BoundContext {
    pub resolves: Vec<bool>,
    pub instances: Vec<NodeId>,
    pub rules: Vec<BoundRule>,
    pub is_steps: Vec<usize>,
    pub not_steps: Vec<usize>,
}

/// One position of a re-resolution window: the context and the edge that
/// led into it (`None` for the first position).
pub(crate) type PatternStep = (usize, Option<usize>);

/// A concrete walk through the network matching a window pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub vertices: Vec<NodeId>,
    /// Predicate of the triple entering `vertices[i + 1]`.
    pub labels: Vec<NodeId>,
}

/// A grammar bound to a network: resolution sets and predicate matches are
/// precomputed so walkers only do index lookups.
#[derive(Debug)]
pub struct Program<'a> {
    net: &'a SemanticNetwork,
    grammar: &'a Grammar,
    pub(crate) contexts: Vec<BoundContext>,
    pub(crate) edges: Vec<BoundEdge>,
    entries: Vec<usize>,
    keep: Option<usize>,
    path_cache: RwLock<HashMap<Vec<PatternStep>, Arc<Vec<Path>>>>,
}

impl<'a> Program<'a> {
    /// Binds `grammar` to `net`. Fails if the grammar has validation errors.
    pub fn new(net: &'a SemanticNetwork, grammar: &'a Grammar) -> Result<Self, RunError> {
        let errors: Vec<_> = validate_grammar(grammar, None)
            .into_iter()
            .filter(|d| d.is_error())
            .collect();
        if !errors.is_empty() {
            return Err(RunError::InvalidGrammar(errors));
        }

        let mut contexts = Vec::with_capacity(grammar.contexts().len());
        let mut edges = Vec::new();
        for (ci, c) in grammar.contexts().iter().enumerate() {
            let instances = resolution(net, &c.for_resource);
            let mut resolves = vec![false; net.node_count()];
            for v in &instances {
                resolves[v.index()] = true;
            }
            let mut rules = Vec::with_capacity(c.rules.len());
            for (ri, r) in c.rules.iter().enumerate() {
                rules.push(match r {
                    Rule::Traverse { edges: defs, .. } => {
                        let mut ids = Vec::with_capacity(defs.len());
                        for (ei, e) in defs.iter().enumerate() {
                            ids.push(edges.len());
                            edges.push(BoundEdge {
                                direction: e.direction,
                                predicate: predicate_match(net, &e.predicate),
                                target: grammar
                                    .context_index(&e.target)
                                    .expect("validated grammar has no dangling targets"),
                                source: (ci, ri, ei),
                            });
                        }
                        BoundRule::Traverse(ids)
                    }
                    Rule::IncrCount { .. } => BoundRule::IncrCount,
                    Rule::SubmitCounts { .. } => BoundRule::SubmitCounts,
                    Rule::Reresolve {
                        probability,
                        steps,
                        obeys,
                        ..
                    } => BoundRule::Reresolve {
                        probability: *probability,
                        steps: *steps,
                        obey_is: obeys.contains(&AttributeKind::Is),
                        obey_not: obeys.contains(&AttributeKind::Not),
                    },
                });
            }
            contexts.push(BoundContext {
                resolves,
                instances,
                rules,
                is_steps: c.steps_of(AttributeKind::Is).into_iter().collect(),
                not_steps: c.steps_of(AttributeKind::Not).into_iter().collect(),
            });
        }

        let entries = grammar
            .contexts()
            .iter()
            .enumerate()
            .filter(|(i, c)| c.is_entry && !contexts[*i].instances.is_empty())
            .map(|(i, _)| i)
            .collect();

        Ok(Program {
            net,
            grammar,
            contexts,
            edges,
            entries,
            keep: Some(grammar.memory_bound() + 1),
            path_cache: RwLock::new(HashMap::new()),
        })
    }

    /// Keep every history record instead of the minimum needed.
    pub fn with_full_history(mut self) -> Self {
        self.keep = None;
        self
    }

    pub fn network(&self) -> &'a SemanticNetwork {
        self.net
    }

    pub fn grammar(&self) -> &'a Grammar {
        self.grammar
    }

    /// Entry contexts that resolve to at least one vertex.
    pub fn runnable_entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn context_index(&self, id: &Node) -> Option<usize> {
        self.grammar.context_index(id)
    }

    /// Sorted vertices a context resolves to.
    pub fn instances(&self, context: usize) -> &[NodeId] {
        &self.contexts[context].instances
    }

    pub fn resolves(&self, context: usize, v: NodeId) -> bool {
        self.contexts[context].resolves[v.index()]
    }

    pub fn edge_def(&self, edge: usize) -> &'a GrammarEdge {
        let (c, r, e) = self.edges[edge].source;
        match &self.grammar.contexts()[c].rules[r] {
            Rule::Traverse { edges, .. } => &edges[e],
            _ => unreachable!("bound edges come from Traverse rules"),
        }
    }

    pub(crate) fn history_keep(&self) -> Option<usize> {
        self.keep
    }

    /// A walker that has just entered `context` at `vertex`, as if spawned
    /// there.
    pub fn start_at(&self, context: &Node, vertex: &Node) -> Result<WalkerState, RunError> {
        let ci = self
            .context_index(context)
            .ok_or_else(|| RunError::Unrunnable(format!("{context} is not a context")))?;
        let v = self
            .net
            .node_id(vertex)
            .filter(|v| self.resolves(ci, *v))
            .ok_or_else(|| RunError::Unrunnable(format!("{vertex} does not resolve {context}")))?;
        Ok(WalkerState::new(
            StepRecord {
                vertex: v,
                label: None,
                context: ci,
                via: None,
                direction: None,
            },
            self.keep,
        ))
    }

    pub(crate) fn cached_paths(&self, key: &[PatternStep]) -> Option<Arc<Vec<Path>>> {
        self.path_cache
            .read()
            .expect("path cache lock")
            .get(key)
            .cloned()
    }

    pub(crate) fn cache_paths(&self, key: Vec<PatternStep>, paths: Vec<Path>) -> Arc<Vec<Path>> {
        let paths = Arc::new(paths);
        self.path_cache
            .write()
            .expect("path cache lock")
            .entry(key)
            .or_insert_with(|| paths.clone())
            .clone()
    }

    pub(crate) fn predicate_matches(&self, pattern: PredicateMatch, predicate: NodeId) -> bool {
        match pattern {
            PredicateMatch::Any => true,
            PredicateMatch::Sub(q) => self.net.is_subproperty_id(predicate, q),
            PredicateMatch::Missing => false,
        }
    }
}

fn resolution(net: &SemanticNetwork, resource: &Node) -> Vec<NodeId> {
    if resource.as_iri() == Some(vocab::RDFS_RESOURCE) {
        return net
            .vertex_ids()
            .filter(|v| !net.node(*v).is_literal())
            .collect();
    }
    match net.node_id(resource) {
        Some(cls) => net.instance_ids(cls),
        None => Vec::new(),
    }
}

fn predicate_match(net: &SemanticNetwork, predicate: &Node) -> PredicateMatch {
    if predicate.as_iri() == Some(vocab::RDF_PROPERTY) {
        return PredicateMatch::Any;
    }
    match net.node_id(predicate) {
        Some(id) => PredicateMatch::Sub(id),
        None => PredicateMatch::Missing,
    }
}
