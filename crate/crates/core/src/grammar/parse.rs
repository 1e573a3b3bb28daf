use std::collections::{BTreeMap, BTreeSet};

use super::{
    Attribute, AttributeKind, Context, Direction, Grammar, GrammarEdge, GrammarVocab, Rule,
};
use crate::graph::{Node, SemanticNetwork};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrammarError {
    #[error("context {context} has no forResource")]
    MissingForResource { context: String },
    #[error("rule sequence of {context} skips rdf:_{missing}")]
    SequenceGap { context: String, missing: usize },
    #[error("edge {edge} targets {target}, which is not a context")]
    DanglingTarget { edge: String, target: String },
    #[error("{subject}: {property} value {value} is not a valid number")]
    BadLiteral {
        subject: String,
        property: String,
        value: String,
    },
    #[error("Reresolve rule {rule}: probability {value} is outside (0, 1]")]
    ProbabilityRange { rule: String, value: f64 },
    #[error("{subject}: {message}")]
    Malformed { subject: String, message: String },
}

/// Parser settings.
#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    pub vocab: GrammarVocab,
    /// Also accept `rdfs:hasEdge` and `rdf:forResource`, with a warning.
    pub lenient: bool,
}

#[derive(Clone, Debug)]
pub struct ParsedGrammar {
    pub grammar: Grammar,
    pub warnings: Vec<String>,
}

/// Reads a grammar from its triples using the default vocabulary.
pub fn parse_grammar(net: &SemanticNetwork) -> Result<Grammar, GrammarError> {
    parse_grammar_with(net, &ParseOptions::default()).map(|p| p.grammar)
}

pub fn parse_grammar_with(
    net: &SemanticNetwork,
    opts: &ParseOptions,
) -> Result<ParsedGrammar, GrammarError> {
    let mut reader = Reader {
        net,
        v: &opts.vocab,
        lenient: opts.lenient,
        warnings: Vec::new(),
    };
    let grammar = reader.grammar()?;
    Ok(ParsedGrammar {
        grammar,
        warnings: reader.warnings,
    })
}

struct Reader<'a> {
    net: &'a SemanticNetwork,
    v: &'a GrammarVocab,
    lenient: bool,
    warnings: Vec<String>,
}

impl Reader<'_> {
    fn grammar(&mut self) -> Result<Grammar, GrammarError> {
        let ty = Node::iri(vocab::RDF_TYPE);
        let entry_type = self.v.entry_context();
        let context_type = self.v.context();
        let mut ids: BTreeMap<Node, bool> = BTreeMap::new();
        for t in self.net.iter() {
            if t.predicate() == &ty {
                if t.object() == &entry_type {
                    ids.insert(t.subject().clone(), true);
                } else if t.object() == &context_type {
                    ids.entry(t.subject().clone()).or_insert(false);
                }
            }
        }
        let mut contexts = Vec::with_capacity(ids.len());
        for (id, is_entry) in &ids {
            contexts.push(self.context(id, *is_entry)?);
        }
        for c in &contexts {
            for e in c.traverse_edges() {
                if !ids.contains_key(&e.target) {
                    return Err(GrammarError::DanglingTarget {
                        edge: e.id.to_string(),
                        target: e.target.to_string(),
                    });
                }
            }
        }
        Ok(Grammar::new(contexts))
    }

    fn context(&mut self, id: &Node, is_entry: bool) -> Result<Context, GrammarError> {
        let mut for_resource = self.objects(id, &self.v.for_resource());
        if for_resource.is_empty() && self.lenient {
            let typo = Node::iri(format!("{}forResource", vocab::RDF));
            for_resource = self.objects(id, &typo);
            if !for_resource.is_empty() {
                self.warnings
                    .push(format!("{id}: rdf:forResource read as forResource"));
            }
        }
        let for_resource = match for_resource.as_slice() {
            [] => {
                return Err(GrammarError::MissingForResource {
                    context: id.to_string(),
                })
            }
            [one] => one.clone(),
            _ => return Err(malformed(id, "more than one forResource")),
        };

        let rules = match self.objects(id, &self.v.has_rules()).as_slice() {
            [] => Vec::new(),
            [seq] => self.rules(id, seq)?,
            _ => return Err(malformed(id, "more than one hasRules sequence")),
        };

        let mut attributes = Vec::new();
        for set in self.objects(id, &self.v.has_attributes()) {
            for attr in self.objects(&set, &self.v.has_attribute()) {
                attributes.push(self.attribute(&attr)?);
            }
        }

        Ok(Context {
            id: id.clone(),
            for_resource,
            is_entry,
            rules,
            attributes,
        })
    }

    fn rules(&mut self, context: &Node, seq: &Node) -> Result<Vec<Rule>, GrammarError> {
        let mut members: BTreeMap<usize, Node> = BTreeMap::new();
        for t in self.net.out_triples(seq) {
            let Some(n) = t.predicate().as_iri().and_then(vocab::member_index) else {
                continue;
            };
            if members.insert(n, t.object().clone()).is_some() {
                return Err(malformed(seq, &format!("rdf:_{n} has more than one rule")));
            }
        }
        let mut rules = Vec::with_capacity(members.len());
        for (expected, (n, rule)) in (1..).zip(members) {
            if n != expected {
                return Err(GrammarError::SequenceGap {
                    context: context.to_string(),
                    missing: expected,
                });
            }
            rules.push(self.rule(&rule)?);
        }
        Ok(rules)
    }

    fn rule(&mut self, id: &Node) -> Result<Rule, GrammarError> {
        let kinds = [
            self.v.traverse(),
            self.v.incr_count(),
            self.v.submit_counts(),
            self.v.reresolve(),
        ];
        let types = self.types(id);
        let found: Vec<usize> = (0..kinds.len())
            .filter(|i| types.contains(&kinds[*i]))
            .collect();
        let rule = match found.as_slice() {
            [0] => Rule::Traverse {
                id: id.clone(),
                edges: self.edges(id)?,
            },
            [1] => Rule::IncrCount { id: id.clone() },
            [2] => Rule::SubmitCounts { id: id.clone() },
            [3] => {
                let probability = self.number(id, &self.v.probability())?;
                if !(probability > 0.0 && probability <= 1.0) {
                    return Err(GrammarError::ProbabilityRange {
                        rule: id.to_string(),
                        value: probability,
                    });
                }
                let steps = self.count(id, &self.v.steps())?;
                let mut obeys = BTreeSet::new();
                for o in self.objects(id, &self.v.obeys()) {
                    obeys.insert(self.attribute_kind(id, &o)?);
                }
                Rule::Reresolve {
                    id: id.clone(),
                    probability,
                    steps,
                    obeys,
                }
            }
            [] => return Err(malformed(id, "rule has no recognised rule type")),
            _ => return Err(malformed(id, "rule has more than one rule type")),
        };
        Ok(rule)
    }

    fn edges(&mut self, rule: &Node) -> Result<Vec<GrammarEdge>, GrammarError> {
        let mut ids = self.objects(rule, &self.v.has_edge());
        if self.lenient {
            let typo = Node::iri(format!("{}hasEdge", vocab::RDFS));
            let extra = self.objects(rule, &typo);
            if !extra.is_empty() {
                self.warnings
                    .push(format!("{rule}: rdfs:hasEdge read as hasEdge"));
            }
            ids.extend(extra);
        }
        let mut edges = Vec::with_capacity(ids.len());
        for id in ids {
            let types = self.types(&id);
            let direction = match (
                types.contains(&self.v.out_edge()),
                types.contains(&self.v.in_edge()),
            ) {
                (true, false) => Direction::Out,
                (false, true) => Direction::In,
                (true, true) => return Err(malformed(&id, "edge typed both OutEdge and InEdge")),
                (false, false) => return Err(malformed(&id, "edge is neither OutEdge nor InEdge")),
            };
            let predicate = self.single(&id, &self.v.has_predicate(), "hasPredicate")?;
            let (prop, name) = match direction {
                Direction::Out => (self.v.has_object(), "hasObject"),
                Direction::In => (self.v.has_subject(), "hasSubject"),
            };
            let target = self.single(&id, &prop, name)?;
            edges.push(GrammarEdge {
                id,
                direction,
                predicate,
                target,
            });
        }
        Ok(edges)
    }

    fn attribute(&self, id: &Node) -> Result<Attribute, GrammarError> {
        let types = self.types(id);
        let kind = match (types.contains(&self.v.is()), types.contains(&self.v.not())) {
            (true, false) => AttributeKind::Is,
            (false, true) => AttributeKind::Not,
            _ => {
                return Err(malformed(
                    id,
                    "attribute must be typed exactly one of Is, Not",
                ))
            }
        };
        let steps = self.count(id, &self.v.steps())?;
        if steps == 0 {
            return Err(malformed(id, "attribute steps must be at least 1"));
        }
        Ok(Attribute {
            id: id.clone(),
            kind,
            steps,
        })
    }

    fn attribute_kind(&self, rule: &Node, node: &Node) -> Result<AttributeKind, GrammarError> {
        if node == &self.v.is() {
            Ok(AttributeKind::Is)
        } else if node == &self.v.not() {
            Ok(AttributeKind::Not)
        } else {
            Err(malformed(
                rule,
                &format!("obeys {node}, expected Is or Not"),
            ))
        }
    }

    fn number(&self, subject: &Node, prop: &Node) -> Result<f64, GrammarError> {
        let lit = self.literal(subject, prop)?;
        lit.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad_literal(subject, prop, &lit))
    }

    fn count(&self, subject: &Node, prop: &Node) -> Result<usize, GrammarError> {
        let lit = self.literal(subject, prop)?;
        let trimmed = lit.trim();
        trimmed
            .strip_prefix('+')
            .unwrap_or(trimmed)
            .parse::<usize>()
            .map_err(|_| bad_literal(subject, prop, &lit))
    }

    fn literal(&self, subject: &Node, prop: &Node) -> Result<String, GrammarError> {
        let node = self.single(subject, prop, local_name(prop))?;
        match node.as_literal() {
            Some(lit) => Ok(lit.lexical.clone()),
            None => Err(bad_literal(subject, prop, &node.to_string())),
        }
    }

    fn single(&self, subject: &Node, prop: &Node, name: &str) -> Result<Node, GrammarError> {
        match self.objects(subject, prop).as_slice() {
            [one] => Ok(one.clone()),
            [] => Err(malformed(subject, &format!("missing {name}"))),
            _ => Err(malformed(subject, &format!("more than one {name}"))),
        }
    }

    fn types(&self, subject: &Node) -> Vec<Node> {
        self.objects(subject, &Node::iri(vocab::RDF_TYPE))
    }

    fn objects(&self, subject: &Node, prop: &Node) -> Vec<Node> {
        self.net
            .out_triples(subject)
            .into_iter()
            .filter(|t| t.predicate() == prop)
            .map(|t| t.object().clone())
            .collect()
    }
}

fn local_name(prop: &Node) -> &str {
    let iri = prop.as_iri().unwrap_or_default();
    iri.rsplit(['#', '/', ':']).next().unwrap_or(iri)
}

fn malformed(subject: &Node, message: &str) -> GrammarError {
    GrammarError::Malformed {
        subject: subject.to_string(),
        message: message.to_string(),
    }
}

fn bad_literal(subject: &Node, prop: &Node, value: &str) -> GrammarError {
    GrammarError::BadLiteral {
        subject: subject.to_string(),
        property: local_name(prop).to_string(),
        value: value.to_string(),
    }
}
