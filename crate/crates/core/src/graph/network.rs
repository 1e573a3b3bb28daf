use std::collections::{BTreeSet, HashMap, HashSet};

use super::schema::SchemaView;
use super::term::{Node, Triple};
use super::GraphError;
use crate::vocab;

/// Dense handle for an interned term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Handle for a stored triple (insertion order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleId(u32);

impl TripleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned form of a triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TripleIds {
    pub subject: NodeId,
    pub predicate: NodeId,
    pub object: NodeId,
}

/// An in-memory triple set with subject and object indices and an RDFS
/// subsumption view.
///
/// Terms are interned; all id-based accessors are stable for the lifetime of
/// the network since nothing is ever removed.
#[derive(Clone, Debug, Default)]
pub struct SemanticNetwork {
    nodes: Vec<Node>,
    ids: HashMap<Node, NodeId>,
    triples: Vec<TripleIds>,
    present: HashSet<TripleIds>,
    outgoing: Vec<Vec<TripleId>>,
    incoming: Vec<Vec<TripleId>>,
    vertex: Vec<bool>,
    schema: SchemaView,
    documents: u32,
}

impl SemanticNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct triples.
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Number of distinct terms appearing as a subject or object.
    pub fn vertex_count(&self) -> usize {
        self.vertex.iter().filter(|v| **v).count()
    }

    /// Number of interned terms (vertices and predicates).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Inserts `t`, returning `false` if it was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        let refresh = self.touches_schema(&t);
        let added = self.insert_raw(t);
        if added && refresh {
            self.refresh_schema();
        }
        added
    }

    /// Builds and inserts a triple from its parts.
    pub fn add(
        &mut self,
        subject: impl Into<Node>,
        predicate: impl Into<Node>,
        object: impl Into<Node>,
    ) -> Result<bool, GraphError> {
        Ok(self.insert(Triple::new(subject, predicate, object)?))
    }

    /// Inserts a batch, recomputing the schema closures once at the end.
    pub fn extend<I: IntoIterator<Item = Triple>>(&mut self, triples: I) -> usize {
        let mut added = 0;
        for t in triples {
            if self.insert_raw(t) {
                added += 1;
            }
        }
        self.refresh_schema();
        added
    }

    pub fn contains(&self, t: &Triple) -> bool {
        let (Some(s), Some(p), Some(o)) = (
            self.node_id(t.subject()),
            self.node_id(t.predicate()),
            self.node_id(t.object()),
        ) else {
            return false;
        };
        self.present.contains(&TripleIds {
            subject: s,
            predicate: p,
            object: o,
        })
    }

    /// All triples in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        (0..self.triples.len()).map(|i| self.triple(TripleId(i as u32)))
    }

    /// Triples whose subject is `v`; empty when `v` is unknown.
    pub fn out_triples(&self, v: &Node) -> Vec<Triple> {
        match self.node_id(v) {
            Some(id) => self.outgoing[id.index()]
                .iter()
                .map(|t| self.triple(*t))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Triples whose object is `v`; empty when `v` is unknown.
    pub fn in_triples(&self, v: &Node) -> Vec<Triple> {
        match self.node_id(v) {
            Some(id) => self.incoming[id.index()]
                .iter()
                .map(|t| self.triple(*t))
                .collect(),
            None => Vec::new(),
        }
    }

    /// True iff `v` is typed (directly or through `rdfs:subClassOf`) as
    /// `cls`, or `v` is `cls` itself and `cls` is not used as a class.
    pub fn is_instance_of(&self, v: &Node, cls: &Node) -> bool {
        if cls.as_iri() == Some(vocab::RDFS_RESOURCE) {
            return !v.is_literal() && self.node_id(v).is_some_and(|id| self.is_vertex(id));
        }
        match (self.node_id(v), self.node_id(cls)) {
            (Some(v), Some(c)) => self.is_instance_id(v, c),
            _ => v == cls,
        }
    }

    /// Every vertex that resolves `cls` (see [`Self::is_instance_of`]).
    pub fn instances_of(&self, cls: &Node) -> BTreeSet<Node> {
        if cls.as_iri() == Some(vocab::RDFS_RESOURCE) {
            return self
                .vertex_ids()
                .map(|id| self.node(id))
                .filter(|n| !n.is_literal())
                .cloned()
                .collect();
        }
        match self.node_id(cls) {
            Some(c) => self
                .instance_ids(c)
                .into_iter()
                .map(|id| self.node(id).clone())
                .collect(),
            None => BTreeSet::new(),
        }
    }

    /// Reflexive-transitive `rdfs:subPropertyOf`.
    pub fn is_subproperty_of(&self, p: &Node, q: &Node) -> bool {
        if p == q {
            return true;
        }
        match (self.node_id(p), self.node_id(q)) {
            (Some(p), Some(q)) => self.schema.is_subproperty(p, q),
            _ => false,
        }
    }

    /// Reflexive-transitive `rdfs:subClassOf`.
    pub fn is_subclass_of(&self, a: &Node, b: &Node) -> bool {
        if a == b {
            return true;
        }
        match (self.node_id(a), self.node_id(b)) {
            (Some(a), Some(b)) => self.schema.is_subclass(a, b),
            _ => false,
        }
    }

    pub fn schema(&self) -> &SchemaView {
        &self.schema
    }

    // ---- id-level access -------------------------------------------------

    pub fn node_id(&self, node: &Node) -> Option<NodeId> {
        self.ids.get(node).copied()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn triple_ids(&self, id: TripleId) -> TripleIds {
        self.triples[id.index()]
    }

    pub fn triple(&self, id: TripleId) -> Triple {
        let t = self.triples[id.index()];
        Triple::new(
            self.node(t.subject).clone(),
            self.node(t.predicate).clone(),
            self.node(t.object).clone(),
        )
        .expect("stored triples are well formed")
    }

    pub fn outgoing(&self, v: NodeId) -> &[TripleId] {
        &self.outgoing[v.index()]
    }

    pub fn incoming(&self, v: NodeId) -> &[TripleId] {
        &self.incoming[v.index()]
    }

    /// True if the term occurs as a subject or object of some triple.
    pub fn is_vertex(&self, v: NodeId) -> bool {
        self.vertex[v.index()]
    }

    /// Vertex ids in interning order.
    pub fn vertex_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.vertex
            .iter()
            .enumerate()
            .filter(|(_, v)| **v)
            .map(|(i, _)| NodeId(i as u32))
    }

    pub fn is_instance_id(&self, v: NodeId, cls: NodeId) -> bool {
        if Some(cls) == self.schema.resource_class() {
            return self.is_vertex(v) && !self.node(v).is_literal();
        }
        if v == cls && !self.schema.is_class_term(cls) {
            return true;
        }
        self.schema
            .asserted_types(v)
            .iter()
            .any(|c| self.schema.is_subclass(*c, cls))
    }

    /// Sorted ids of every vertex resolving `cls`.
    pub fn instance_ids(&self, cls: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = if Some(cls) == self.schema.resource_class() {
            self.vertex_ids()
                .filter(|v| !self.node(*v).is_literal())
                .collect()
        } else {
            let mut found: Vec<NodeId> = self
                .schema
                .typed_vertices()
                .filter(|v| self.is_instance_id(*v, cls))
                .collect();
            if self.is_vertex(cls) && !self.schema.is_class_term(cls) {
                found.push(cls);
            }
            found
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_subproperty_id(&self, p: NodeId, q: NodeId) -> bool {
        p == q || self.schema.is_subproperty(p, q)
    }

    /// Allocates a fresh blank-node scope for the next loaded document.
    pub(crate) fn next_scope(&mut self) -> u32 {
        let scope = self.documents;
        self.documents += 1;
        scope
    }

    // ---- internals -------------------------------------------------------

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(id) = self.ids.get(&node) {
            return *id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.ids.insert(node, id);
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        self.vertex.push(false);
        id
    }

    fn insert_raw(&mut self, t: Triple) -> bool {
        let subject = self.intern(t.subject().clone());
        let predicate = self.intern(t.predicate().clone());
        let object = self.intern(t.object().clone());
        let ids = TripleIds {
            subject,
            predicate,
            object,
        };
        if !self.present.insert(ids) {
            return false;
        }
        let tid = TripleId(self.triples.len() as u32);
        self.triples.push(ids);
        self.outgoing[subject.index()].push(tid);
        self.incoming[object.index()].push(tid);
        self.vertex[subject.index()] = true;
        self.vertex[object.index()] = true;
        true
    }

    fn touches_schema(&self, t: &Triple) -> bool {
        matches!(
            t.predicate().as_iri(),
            Some(vocab::RDF_TYPE | vocab::RDFS_SUBCLASS_OF | vocab::RDFS_SUBPROPERTY_OF)
        ) || t.subject().as_iri() == Some(vocab::RDFS_RESOURCE)
            || t.object().as_iri() == Some(vocab::RDFS_RESOURCE)
    }

    fn refresh_schema(&mut self) {
        self.schema = SchemaView::build(&self.ids, &self.triples);
    }
}
