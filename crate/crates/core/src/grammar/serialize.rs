use super::{AttributeKind, Direction, Grammar, GrammarVocab, Rule};
use crate::graph::{Node, Triple};
use crate::vocab;

/// Encodes a grammar as triples. Rule sequences and attribute sets get ids
/// derived from their context id (`…_rules`, `…_attributes`).
pub fn serialize_grammar(g: &Grammar, v: &GrammarVocab) -> Vec<Triple> {
    let mut out = Out::default();
    let ty = Node::iri(vocab::RDF_TYPE);
    for c in g.contexts() {
        let kind = if c.is_entry {
            v.entry_context()
        } else {
            v.context()
        };
        out.push(&c.id, &ty, &kind);
        out.push(&c.id, &v.for_resource(), &c.for_resource);

        let seq = derived(&c.id, "rules");
        let set = derived(&c.id, "attributes");
        if !c.rules.is_empty() {
            out.push(&c.id, &v.has_rules(), &seq);
        }
        if !c.attributes.is_empty() {
            out.push(&c.id, &v.has_attributes(), &set);
        }
        if !c.rules.is_empty() {
            out.push(&seq, &ty, &Node::iri(vocab::RDF_SEQ));
            for (i, rule) in c.rules.iter().enumerate() {
                out.push(&seq, &Node::iri(vocab::rdf_member(i + 1)), rule.id());
            }
            for rule in &c.rules {
                write_rule(&mut out, rule, v);
            }
        }
        if !c.attributes.is_empty() {
            for a in &c.attributes {
                out.push(&set, &v.has_attribute(), &a.id);
            }
            for a in &c.attributes {
                out.push(&a.id, &ty, &kind_node(a.kind, v));
                out.push(&a.id, &v.steps(), &integer(a.steps));
            }
        }
    }
    out.triples
}

fn write_rule(out: &mut Out, rule: &Rule, v: &GrammarVocab) {
    let ty = Node::iri(vocab::RDF_TYPE);
    match rule {
        Rule::Traverse { id, edges } => {
            out.push(id, &ty, &v.traverse());
            for e in edges {
                out.push(id, &v.has_edge(), &e.id);
                let (kind, target_prop) = match e.direction {
                    Direction::Out => (v.out_edge(), v.has_object()),
                    Direction::In => (v.in_edge(), v.has_subject()),
                };
                out.push(&e.id, &ty, &kind);
                out.push(&e.id, &v.has_predicate(), &e.predicate);
                out.push(&e.id, &target_prop, &e.target);
            }
        }
        Rule::IncrCount { id } => out.push(id, &ty, &v.incr_count()),
        Rule::SubmitCounts { id } => out.push(id, &ty, &v.submit_counts()),
        Rule::Reresolve {
            id,
            probability,
            steps,
            obeys,
        } => {
            out.push(id, &ty, &v.reresolve());
            out.push(
                id,
                &v.probability(),
                &Node::typed_literal(format!("{probability}"), vocab::XSD_DECIMAL),
            );
            out.push(id, &v.steps(), &integer(*steps));
            for k in obeys {
                out.push(id, &v.obeys(), &kind_node(*k, v));
            }
        }
    }
}

#[derive(Default)]
struct Out {
    triples: Vec<Triple>,
}

impl Out {
    fn push(&mut self, s: &Node, p: &Node, o: &Node) {
        let t = Triple::new(s.clone(), p.clone(), o.clone()).expect("grammar ids are resources");
        if !self.triples.contains(&t) {
            self.triples.push(t);
        }
    }
}

fn kind_node(kind: AttributeKind, v: &GrammarVocab) -> Node {
    match kind {
        AttributeKind::Is => v.is(),
        AttributeKind::Not => v.not(),
    }
}

fn integer(n: usize) -> Node {
    Node::typed_literal(n.to_string(), vocab::XSD_INTEGER)
}

fn derived(id: &Node, suffix: &str) -> Node {
    match id {
        Node::Blank(b) => Node::Blank(crate::graph::BlankNode {
            label: format!("{}_{suffix}", b.label),
            scope: b.scope,
        }),
        other => Node::iri(format!("{}_{suffix}", other.key())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::grammar::{parse_grammar, Attribute, Context, GrammarEdge};
    use crate::graph::{parse_triples, serialize, SemanticNetwork};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn round_trip(g: &Grammar) -> Grammar {
        let mut net = SemanticNetwork::new();
        net.extend(serialize_grammar(g, &GrammarVocab::default()));
        let text = serialize(&net);
        parse_grammar(&parse_triples(&text).unwrap()).unwrap()
    }

    #[test]
    fn shipped_grammars_round_trip() {
        for g in [
            fixtures::coaut_grammar(),
            fixtures::coaut_prime_grammar(),
            fixtures::unlabeled_grammar(),
            fixtures::fig10_grammar(),
        ] {
            assert_eq!(round_trip(&g), g);
        }
    }

    fn term(i: usize) -> Node {
        Node::iri(format!("urn:g:n{i}"))
    }

    prop_compose! {
        fn arb_rule(n_ctx: usize, ctx: usize, slot: usize)(
            kind in 0..4usize,
            edges in prop::collection::vec((any::<bool>(), 0..3usize, 0..n_ctx), 1..4),
            probability in 1..=100u32,
            steps in 0..5usize,
            obeys in prop::collection::btree_set(prop_oneof![Just(AttributeKind::Is), Just(AttributeKind::Not)], 0..3),
        ) -> Rule {
            let id = Node::iri(format!("urn:g:c{ctx}_r{slot}"));
            match kind {
                0 => Rule::Traverse {
                    edges: edges.iter().enumerate().map(|(k, (out, p, t))| GrammarEdge {
                        id: Node::iri(format!("urn:g:c{ctx}_r{slot}_e{k}")),
                        direction: if *out { Direction::Out } else { Direction::In },
                        predicate: term(*p),
                        target: Node::iri(format!("urn:g:c{t}")),
                    }).collect(),
                    id,
                },
                1 => Rule::IncrCount { id },
                2 => Rule::SubmitCounts { id },
                _ => Rule::Reresolve { id, probability: probability as f64 / 100.0, steps, obeys },
            }
        }
    }

    fn arb_context(n_ctx: usize, ctx: usize) -> impl Strategy<Value = Context> {
        (
            any::<bool>(),
            0..4usize,
            prop::collection::vec((any::<bool>(), 1..6usize), 0..3),
            (0..4usize).prop_flat_map(move |n| {
                (0..n)
                    .map(|slot| arb_rule(n_ctx, ctx, slot))
                    .collect::<Vec<_>>()
            }),
        )
            .prop_map(move |(is_entry, res, attrs, rules)| Context {
                id: Node::iri(format!("urn:g:c{ctx}")),
                for_resource: term(res + 10),
                is_entry,
                rules,
                attributes: attrs
                    .into_iter()
                    .enumerate()
                    .map(|(k, (is, steps))| Attribute {
                        id: Node::iri(format!("urn:g:c{ctx}_a{k}")),
                        kind: if is {
                            AttributeKind::Is
                        } else {
                            AttributeKind::Not
                        },
                        steps,
                    })
                    .collect(),
            })
    }

    fn arb_grammar() -> impl Strategy<Value = Grammar> {
        (1..5usize).prop_flat_map(|n| {
            (0..n)
                .map(|c| arb_context(n, c))
                .collect::<Vec<_>>()
                .prop_map(Grammar::new)
        })
    }

    proptest! {
        #[test]
        fn parse_after_serialize_is_identity(g in arb_grammar()) {
            prop_assert_eq!(round_trip(&g), g);
        }

        #[test]
        fn edge_direction_follows_typing(p in 0..3usize) {
            let edge = |id: &str, direction| GrammarEdge {
                id: Node::iri(format!("urn:g:{id}")),
                direction,
                predicate: term(p),
                target: Node::iri("urn:g:c0"),
            };
            let g = Grammar::new(vec![Context::new("urn:g:c0", term(10)).entry().rule(Rule::Traverse {
                id: Node::iri("urn:g:t"),
                edges: vec![edge("out", Direction::Out), edge("in", Direction::In)],
            })]);
            let back = round_trip(&g);
            let dirs: BTreeSet<_> = back.contexts()[0]
                .traverse_edges()
                .iter()
                .map(|e| (e.id.key(), e.direction))
                .collect();
            prop_assert!(dirs.contains(&("urn:g:out".to_string(), Direction::Out)));
            prop_assert!(dirs.contains(&("urn:g:in".to_string(), Direction::In)));
        }
    }
}
