//! Walker grammars: contexts, ordered rules and history attributes.

mod parse;
mod serialize;
mod validate;
mod vocab;

use std::collections::BTreeSet;
use std::fmt;

use crate::graph::Node;

pub use parse::{parse_grammar, parse_grammar_with, GrammarError, ParseOptions, ParsedGrammar};
pub use serialize::serialize_grammar;
pub use validate::{validate_grammar, Diagnostic, Severity};
pub use vocab::{GrammarVocab, DEFAULT_NAMESPACE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Follow a triple from subject to object.
    Out,
    /// Follow a triple from object to subject.
    In,
}

impl Direction {
    pub fn sign(self) -> char {
        match self {
            Direction::Out => '+',
            Direction::In => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttributeKind {
    /// Resolution must equal a vertex from `steps` ago.
    Is,
    /// Resolution must differ from the vertex `steps` ago.
    Not,
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttributeKind::Is => "Is",
            AttributeKind::Not => "Not",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attribute {
    pub id: Node,
    pub kind: AttributeKind,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarEdge {
    pub id: Node,
    pub direction: Direction,
    /// Predicate the traversed triple must be a sub-property of.
    /// `rdf:Property` matches any predicate.
    pub predicate: Node,
    /// Id of the context the walker moves to.
    pub target: Node,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Traverse {
        id: Node,
        edges: Vec<GrammarEdge>,
    },
    IncrCount {
        id: Node,
    },
    SubmitCounts {
        id: Node,
    },
    Reresolve {
        id: Node,
        probability: f64,
        steps: usize,
        obeys: BTreeSet<AttributeKind>,
    },
}

impl Rule {
    pub fn id(&self) -> &Node {
        match self {
            Rule::Traverse { id, .. }
            | Rule::IncrCount { id }
            | Rule::SubmitCounts { id }
            | Rule::Reresolve { id, .. } => id,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Rule::Traverse { .. } => "Traverse",
            Rule::IncrCount { .. } => "IncrCount",
            Rule::SubmitCounts { .. } => "SubmitCounts",
            Rule::Reresolve { .. } => "Reresolve",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Context {
    pub id: Node,
    /// Class or instance the context resolves to.
    pub for_resource: Node,
    pub is_entry: bool,
    pub rules: Vec<Rule>,
    pub attributes: Vec<Attribute>,
}

impl Context {
    pub fn new(id: impl Into<Node>, for_resource: impl Into<Node>) -> Self {
        Context {
            id: id.into(),
            for_resource: for_resource.into(),
            is_entry: false,
            rules: Vec::new(),
            attributes: Vec::new(),
        }
    }

    pub fn entry(mut self) -> Self {
        self.is_entry = true;
        self
    }

    pub fn rule(mut self, rule: Rule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn attribute(mut self, id: impl Into<Node>, kind: AttributeKind, steps: usize) -> Self {
        self.attributes.push(Attribute {
            id: id.into(),
            kind,
            steps,
        });
        self
    }

    /// Step values of all attributes of `kind` (the M set).
    pub fn steps_of(&self, kind: AttributeKind) -> BTreeSet<usize> {
        self.attributes
            .iter()
            .filter(|a| a.kind == kind)
            .map(|a| a.steps)
            .collect()
    }

    pub fn has_incr_count(&self) -> bool {
        self.rules
            .iter()
            .any(|r| matches!(r, Rule::IncrCount { .. }))
    }

    pub fn has_submit_counts(&self) -> bool {
        self.rules
            .iter()
            .any(|r| matches!(r, Rule::SubmitCounts { .. }))
    }

    /// Edges of the first Traverse rule, if any.
    pub fn traverse_edges(&self) -> &[GrammarEdge] {
        self.rules
            .iter()
            .find_map(|r| match r {
                Rule::Traverse { edges, .. } => Some(edges.as_slice()),
                _ => None,
            })
            .unwrap_or(&[])
    }
}

/// A walker program. Contexts are kept sorted by id so that equal grammars
/// compare equal regardless of construction order.
#[derive(Clone, Debug, PartialEq)]
pub struct Grammar {
    contexts: Vec<Context>,
}

impl Grammar {
    pub fn new(mut contexts: Vec<Context>) -> Self {
        contexts.sort_by(|a, b| a.id.cmp(&b.id));
        for c in &mut contexts {
            c.attributes.sort_by(|a, b| a.id.cmp(&b.id));
            for r in &mut c.rules {
                if let Rule::Traverse { edges, .. } = r {
                    edges.sort_by(|a, b| a.id.cmp(&b.id));
                }
            }
        }
        Grammar { contexts }
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context(&self, id: &Node) -> Option<&Context> {
        self.contexts
            .binary_search_by(|c| c.id.cmp(id))
            .ok()
            .map(|i| &self.contexts[i])
    }

    pub fn context_index(&self, id: &Node) -> Option<usize> {
        self.contexts.binary_search_by(|c| c.id.cmp(id)).ok()
    }

    /// Exactly the contexts marked as entries.
    pub fn entry_contexts(&self) -> Vec<&Context> {
        self.contexts.iter().filter(|c| c.is_entry).collect()
    }

    /// Largest Is/Not step value.
    pub fn max_attribute_steps(&self) -> usize {
        self.contexts
            .iter()
            .flat_map(|c| c.attributes.iter().map(|a| a.steps))
            .max()
            .unwrap_or(0)
    }

    /// Largest Reresolve window.
    pub fn max_reresolve_steps(&self) -> usize {
        self.reresolve_rules()
            .map(|(steps, _)| steps)
            .max()
            .unwrap_or(0)
    }

    /// How many past records a walker must keep (beyond the current one)
    /// for every constraint to be evaluated exactly.
    pub fn memory_bound(&self) -> usize {
        let attrs = self.max_attribute_steps();
        let reresolve = self.max_reresolve_steps();
        let obeying = self.reresolve_rules().any(|(_, obeys)| !obeys);
        if obeying {
            reresolve + attrs
        } else {
            attrs.max(reresolve)
        }
    }

    fn reresolve_rules(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.contexts
            .iter()
            .flat_map(|c| c.rules.iter())
            .filter_map(|r| match r {
                Rule::Reresolve { steps, obeys, .. } => Some((*steps, obeys.is_empty())),
                _ => None,
            })
    }
}
