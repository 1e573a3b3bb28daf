//! Semantic network storage: terms, triples, indices and RDFS subsumption.

mod network;
mod ntriples;
mod schema;
mod term;

pub use network::{NodeId, SemanticNetwork, TripleId, TripleIds};
pub use ntriples::{
    parse_into, parse_triples, read_triples, serialize, serialize_prefixed, ParseError,
};
pub use schema::SchemaView;
pub use term::{BlankNode, Literal, Node, Position, Triple};

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("invalid {position} {term}: {reason}")]
    Structure {
        position: Position,
        term: String,
        reason: &'static str,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
}
