use std::collections::VecDeque;
use std::fmt;

use super::{Grammar, Rule};
use crate::graph::{Node, SemanticNetwork};
use crate::vocab;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Note,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Offending grammar resource, when there is one.
    pub subject: Option<String>,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, subject: Option<&Node>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity,
            subject: subject.map(Node::to_string),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        };
        match &self.subject {
            Some(s) => write!(f, "{level}: {s}: {}", self.message),
            None => write!(f, "{level}: {}", self.message),
        }
    }
}

/// Static checks. Passing a network additionally checks that resources and
/// predicates named by the grammar occur in it.
pub fn validate_grammar(g: &Grammar, net: Option<&SemanticNetwork>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let contexts = g.contexts();
    let n = contexts.len();

    if g.entry_contexts().is_empty() {
        out.push(Diagnostic::new(Severity::Error, None, "no entry context"));
    }

    // successor lists over context indices
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, c) in contexts.iter().enumerate() {
        let mut seen_traverse = false;
        for rule in &c.rules {
            if seen_traverse {
                out.push(Diagnostic::new(
                    Severity::Error,
                    Some(rule.id()),
                    format!("unreachable: follows the Traverse rule of {}", c.id),
                ));
            }
            match rule {
                Rule::Traverse { id, edges } => {
                    seen_traverse = true;
                    if edges.is_empty() {
                        out.push(Diagnostic::new(
                            Severity::Error,
                            Some(id),
                            "Traverse rule has no edges",
                        ));
                    }
                    for e in edges {
                        match g.context_index(&e.target) {
                            Some(t) => succ[i].push(t),
                            None => out.push(Diagnostic::new(
                                Severity::Error,
                                Some(&e.id),
                                format!("target {} is not a context", e.target),
                            )),
                        }
                    }
                }
                Rule::Reresolve {
                    id,
                    probability,
                    obeys,
                    ..
                } => {
                    if !(*probability > 0.0 && *probability <= 1.0) {
                        out.push(Diagnostic::new(
                            Severity::Error,
                            Some(id),
                            format!("probability {probability} is outside (0, 1]"),
                        ));
                    }
                    if obeys.is_empty() {
                        out.push(Diagnostic::new(
                            Severity::Note,
                            Some(id),
                            "obeys no attributes; re-resolution ignores Is/Not",
                        ));
                    }
                }
                Rule::IncrCount { .. } | Rule::SubmitCounts { .. } => {}
            }
        }
        for a in &c.attributes {
            if a.steps == 0 {
                out.push(Diagnostic::new(
                    Severity::Error,
                    Some(&a.id),
                    "steps must be at least 1",
                ));
            }
        }
        if c.rules.is_empty() {
            out.push(Diagnostic::new(
                Severity::Note,
                Some(&c.id),
                "context has no rules; walkers halt here",
            ));
        }
    }

    let from_entry = distances(
        &succ,
        contexts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_entry)
            .map(|(i, _)| i),
    );

    for (i, c) in contexts.iter().enumerate() {
        let cycle = shortest_cycle(&succ, i);
        for a in &c.attributes {
            if let Some(len) = cycle {
                if a.steps > len {
                    out.push(Diagnostic::new(
                        Severity::Warning,
                        Some(&a.id),
                        format!(
                            "{} steps {} exceed the shortest grammar cycle ({len}) through {}",
                            a.kind, a.steps, c.id
                        ),
                    ));
                }
            }
        }
        for rule in &c.rules {
            if let Rule::Reresolve { id, steps, .. } = rule {
                if let Some(d) = from_entry[i] {
                    if *steps > d {
                        out.push(Diagnostic::new(
                            Severity::Warning,
                            Some(id),
                            format!(
                                "steps {steps} reach past the entry context on a path of length {d}; the window is shortened there"
                            ),
                        ));
                    }
                }
            }
        }
        if c.has_incr_count() {
            let reach = distances(&succ, std::iter::once(i));
            let submits = contexts
                .iter()
                .enumerate()
                .any(|(j, d)| d.has_submit_counts() && reach[j].is_some());
            if !submits {
                out.push(Diagnostic::new(
                    Severity::Warning,
                    Some(&c.id),
                    "counts made here can never reach a SubmitCounts rule",
                ));
            }
        }
    }

    if let Some(net) = net {
        for c in contexts {
            let res = &c.for_resource;
            if res.as_iri() != Some(vocab::RDFS_RESOURCE) && net.node_id(res).is_none() {
                out.push(Diagnostic::new(
                    Severity::Warning,
                    Some(&c.id),
                    format!("forResource {res} does not occur in the network"),
                ));
            }
            for e in c.traverse_edges() {
                let p = &e.predicate;
                if p.as_iri() != Some(vocab::RDF_PROPERTY) && net.node_id(p).is_none() {
                    out.push(Diagnostic::new(
                        Severity::Warning,
                        Some(&e.id),
                        format!("predicate {p} does not occur in the network"),
                    ));
                }
            }
        }
    }

    out.sort_by_key(|d| d.severity);
    out
}

fn distances(succ: &[Vec<usize>], sources: impl Iterator<Item = usize>) -> Vec<Option<usize>> {
    let mut dist = vec![None; succ.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        dist[s] = Some(0);
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        for &v in &succ[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn shortest_cycle(succ: &[Vec<usize>], start: usize) -> Option<usize> {
    let dist = distances(succ, succ[start].iter().copied());
    dist[start].map(|d| d + 1)
}
