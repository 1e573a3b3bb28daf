use std::collections::{HashMap, HashSet};

use super::network::{NodeId, TripleIds};
use super::term::Node;
use crate::vocab;

/// Subsumption closures and type assertions derived from a triple set.
///
/// Both closures are reflexive by construction: a term with no asserted
/// super-terms is still related to itself.
#[derive(Clone, Debug, Default)]
pub struct SchemaView {
    superclasses: HashMap<NodeId, HashSet<NodeId>>,
    superproperties: HashMap<NodeId, HashSet<NodeId>>,
    types: HashMap<NodeId, Vec<NodeId>>,
    class_terms: HashSet<NodeId>,
    resource: Option<NodeId>,
}

impl SchemaView {
    pub(crate) fn build(ids: &HashMap<Node, NodeId>, triples: &[TripleIds]) -> Self {
        let lookup = |iri: &str| ids.get(&Node::iri(iri)).copied();
        let rdf_type = lookup(vocab::RDF_TYPE);
        let sub_class = lookup(vocab::RDFS_SUBCLASS_OF);
        let sub_property = lookup(vocab::RDFS_SUBPROPERTY_OF);
        let rdfs_class = lookup(vocab::RDFS_CLASS);

        let mut class_edges: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        let mut property_edges: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        let mut types: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        let mut class_terms = HashSet::new();

        for t in triples {
            let p = Some(t.predicate);
            if p == rdf_type {
                types.entry(t.subject).or_default().push(t.object);
                class_terms.insert(t.object);
                if Some(t.object) == rdfs_class {
                    class_terms.insert(t.subject);
                }
            } else if p == sub_class {
                class_edges.entry(t.subject).or_default().push(t.object);
                class_terms.insert(t.subject);
                class_terms.insert(t.object);
            } else if p == sub_property {
                property_edges.entry(t.subject).or_default().push(t.object);
            }
        }
        for v in types.values_mut() {
            v.sort_unstable();
            v.dedup();
        }

        SchemaView {
            superclasses: closure(&class_edges),
            superproperties: closure(&property_edges),
            types,
            class_terms,
            resource: lookup(vocab::RDFS_RESOURCE),
        }
    }

    /// Reflexive-transitive `rdfs:subClassOf`.
    pub fn is_subclass(&self, a: NodeId, b: NodeId) -> bool {
        a == b || self.superclasses.get(&a).is_some_and(|s| s.contains(&b))
    }

    /// Reflexive-transitive `rdfs:subPropertyOf`.
    pub fn is_subproperty(&self, p: NodeId, q: NodeId) -> bool {
        p == q || self.superproperties.get(&p).is_some_and(|s| s.contains(&q))
    }

    /// Classes asserted for `v` via `rdf:type` (sorted, deduplicated).
    pub fn asserted_types(&self, v: NodeId) -> &[NodeId] {
        self.types.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Vertices with at least one `rdf:type` assertion.
    pub fn typed_vertices(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.types.keys().copied()
    }

    /// True if the term is used as a class: an `rdf:type` object, either
    /// side of `rdfs:subClassOf`, or typed `rdfs:Class`.
    pub fn is_class_term(&self, id: NodeId) -> bool {
        self.class_terms.contains(&id)
    }

    /// Id of `rdfs:Resource`, if the network mentions it.
    pub fn resource_class(&self) -> Option<NodeId> {
        self.resource
    }
}

fn closure(edges: &HashMap<NodeId, Vec<NodeId>>) -> HashMap<NodeId, HashSet<NodeId>> {
    let mut out = HashMap::with_capacity(edges.len());
    for &start in edges.keys() {
        let mut seen = HashSet::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                if let Some(next) = edges.get(&n) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        out.insert(start, seen);
    }
    out
}
