//! RDF terms and triples.

use std::fmt;

use super::GraphError;

/// A blank node label. Labels are only meaningful inside the document they
/// were read from, so every loaded document gets its own `scope`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlankNode {
    pub label: String,
    pub scope: u32,
}

/// A literal: lexical form plus optional datatype IRI.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Iri(String),
    Blank(BlankNode),
    Literal(Literal),
}

impl Node {
    pub fn iri(iri: impl Into<String>) -> Self {
        Node::Iri(iri.into())
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Node::Blank(BlankNode {
            label: label.into(),
            scope: 0,
        })
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Node::Literal(Literal {
            lexical: lexical.into(),
            datatype: None,
        })
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Node::Literal(Literal {
            lexical: lexical.into(),
            datatype: Some(datatype.into()),
        })
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Node::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Node::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Node::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Node::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    /// Key used in result files: the bare IRI, `_:label` for blank nodes, or
    /// the quoted lexical form for literals.
    pub fn key(&self) -> String {
        match self {
            Node::Iri(iri) => iri.clone(),
            other => other.to_ntriples(),
        }
    }

    /// N-Triples rendering of this term.
    pub fn to_ntriples(&self) -> String {
        match self {
            Node::Iri(iri) => format!("<{iri}>"),
            Node::Blank(b) if b.scope == 0 => format!("_:{}", b.label),
            Node::Blank(b) => format!("_:{}.s{}", b.label, b.scope),
            Node::Literal(lit) => {
                let mut out = String::with_capacity(lit.lexical.len() + 2);
                out.push('"');
                escape_into(&lit.lexical, &mut out);
                out.push('"');
                if let Some(dt) = &lit.datatype {
                    out.push_str("^^<");
                    out.push_str(dt);
                    out.push('>');
                }
                out
            }
        }
    }
}

fn escape_into(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Iri(iri) => f.write_str(iri),
            other => f.write_str(&other.to_ntriples()),
        }
    }
}

impl From<&str> for Node {
    fn from(iri: &str) -> Self {
        Node::iri(iri)
    }
}

/// Which slot of a triple a term occupies; used in error reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    Subject,
    Predicate,
    Object,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Subject => "subject",
            Position::Predicate => "predicate",
            Position::Object => "object",
        })
    }
}

/// An immutable `<subject, predicate, object>` statement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Node,
    predicate: Node,
    object: Node,
}

impl Triple {
    /// Builds a triple, rejecting literal subjects and non-IRI predicates.
    pub fn new(
        subject: impl Into<Node>,
        predicate: impl Into<Node>,
        object: impl Into<Node>,
    ) -> Result<Self, GraphError> {
        let (subject, predicate, object) = (subject.into(), predicate.into(), object.into());
        if subject.is_literal() {
            return Err(GraphError::Structure {
                position: Position::Subject,
                term: subject.to_ntriples(),
                reason: "a literal cannot be a subject",
            });
        }
        if !predicate.is_iri() {
            return Err(GraphError::Structure {
                position: Position::Predicate,
                term: predicate.to_ntriples(),
                reason: "a predicate must be an IRI",
            });
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Node {
        &self.subject
    }

    pub fn predicate(&self) -> &Node {
        &self.predicate
    }

    pub fn object(&self) -> &Node {
        &self.object
    }

    pub fn to_ntriples(&self) -> String {
        format!(
            "{} {} {} .",
            self.subject.to_ntriples(),
            self.predicate.to_ntriples(),
            self.object.to_ntriples()
        )
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.subject, self.predicate, self.object)
    }
}
