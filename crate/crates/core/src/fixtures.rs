//! Small scholarly networks and the example grammars that run over them.
//!
//! * `toy3`: two universities, three researchers whose conference articles
//!   form a coauthorship triangle.
//! * `toy2x2`: `toy3` plus a second component (`r4`, `r5` at `U3`), joined to
//!   the first only through a journal article.
//! * `toy3-solo`: `toy3` plus a single-author article, so walkers halt.
//! * `fig10`: four vertices on one predicate, for uniform-selection checks.
//! * `mixed`: a strongly connected network with several predicates.

use std::collections::BTreeSet;

use crate::grammar::{
    serialize_grammar, AttributeKind, Context, Direction, Grammar, GrammarEdge, GrammarVocab, Rule,
};
use crate::graph::{serialize_prefixed, Node, SemanticNetwork, Triple};
use crate::vocab;

pub const LANL: &str = "http://www.lanl.gov/";
pub const PSI: &str = "http://www.lanl.gov/grammar#";
pub const EX: &str = "http://example.org/";

pub fn lanl(local: &str) -> Node {
    Node::iri(format!("{LANL}{local}"))
}

pub fn grammar_term(local: &str) -> Node {
    Node::iri(format!("{PSI}{local}"))
}

pub fn ex(local: &str) -> Node {
    Node::iri(format!("{EX}{local}"))
}

fn t(s: Node, p: Node, o: Node) -> Triple {
    Triple::new(s, p, o).expect("fixture triples are well formed")
}

fn ty() -> Node {
    Node::iri(vocab::RDF_TYPE)
}

fn network(triples: Vec<Triple>) -> SemanticNetwork {
    let mut net = SemanticNetwork::new();
    net.extend(triples);
    net
}

const PREFIXES: &[(&str, &str)] = &[
    ("rdf", vocab::RDF),
    ("rdfs", vocab::RDFS),
    ("xsd", vocab::XSD),
    ("lanl", LANL),
];

/// Classes and properties of the scholarly domain.
pub fn scholarly_ontology_triples() -> Vec<Triple> {
    let class = Node::iri(vocab::RDFS_CLASS);
    let sub = Node::iri(vocab::RDFS_SUBCLASS_OF);
    let property = Node::iri(vocab::RDF_PROPERTY);
    let domain = Node::iri(vocab::RDFS_DOMAIN);
    let range = Node::iri(vocab::RDFS_RANGE);
    let mut out = Vec::new();
    for c in [
        "Institution",
        "University",
        "Laboratory",
        "Researcher",
        "Article",
        "ConferenceArticle",
        "JournalArticle",
    ] {
        out.push(t(lanl(c), ty(), class.clone()));
    }
    for (c, parent) in [
        ("University", "Institution"),
        ("Laboratory", "Institution"),
        ("ConferenceArticle", "Article"),
        ("JournalArticle", "Article"),
    ] {
        out.push(t(lanl(c), sub.clone(), lanl(parent)));
    }
    for (p, d, r) in [
        ("locatedAt", "Researcher", "Institution"),
        ("wrote", "Researcher", "Article"),
        ("cites", "Article", "Article"),
    ] {
        out.push(t(lanl(p), ty(), property.clone()));
        out.push(t(lanl(p), domain.clone(), lanl(d)));
        out.push(t(lanl(p), range.clone(), lanl(r)));
    }
    out
}

fn instances(
    universities: &[&str],
    researchers: &[(&str, &str)],
    articles: &[(&str, &str, &[&str])],
) -> Vec<Triple> {
    let mut out = Vec::new();
    for u in universities {
        out.push(t(lanl(u), ty(), lanl("University")));
    }
    for (r, u) in researchers {
        out.push(t(lanl(r), ty(), lanl("Researcher")));
        out.push(t(lanl(r), lanl("locatedAt"), lanl(u)));
    }
    for (a, class, authors) in articles {
        out.push(t(lanl(a), ty(), lanl(class)));
        for r in *authors {
            out.push(t(lanl(r), lanl("wrote"), lanl(a)));
        }
    }
    out
}

const TOY3_ARTICLES: &[(&str, &str, &[&str])] = &[
    ("c1", "ConferenceArticle", &["r1", "r2"]),
    ("c2", "ConferenceArticle", &["r2", "r3"]),
    ("c3", "ConferenceArticle", &["r1", "r3"]),
];

pub fn toy3_triples() -> Vec<Triple> {
    let mut out = scholarly_ontology_triples();
    out.extend(instances(
        &["U1", "U2"],
        &[("r1", "U1"), ("r2", "U1"), ("r3", "U2")],
        TOY3_ARTICLES,
    ));
    out
}

pub fn toy2x2_triples() -> Vec<Triple> {
    let mut out = toy3_triples();
    out.extend(instances(
        &["U3"],
        &[("r4", "U3"), ("r5", "U3")],
        &[
            ("c4", "ConferenceArticle", &["r4", "r5"]),
            ("j1", "JournalArticle", &["r3", "r4"]),
        ],
    ));
    out
}

pub fn toy3_solo_triples() -> Vec<Triple> {
    let mut out = toy3_triples();
    out.extend(instances(&[], &[], &[("c5", "ConferenceArticle", &["r1"])]));
    out
}

pub fn fig10_triples() -> Vec<Triple> {
    let w = ex("omega");
    vec![
        t(ex("j"), w.clone(), ex("a")),
        t(ex("a"), w.clone(), ex("e")),
        t(ex("a"), w, ex("f")),
    ]
}

pub fn mixed_triples() -> Vec<Triple> {
    [
        ("v1", "knows", "v2"),
        ("v2", "cites", "v3"),
        ("v3", "likes", "v1"),
        ("v3", "knows", "v4"),
        ("v4", "cites", "v5"),
        ("v5", "likes", "v6"),
        ("v6", "knows", "v4"),
        ("v2", "likes", "v5"),
        ("v6", "cites", "v1"),
    ]
    .into_iter()
    .map(|(s, p, o)| t(ex(s), ex(p), ex(o)))
    .collect()
}

pub fn scholarly_ontology() -> SemanticNetwork {
    network(scholarly_ontology_triples())
}

pub fn toy3() -> SemanticNetwork {
    network(toy3_triples())
}

pub fn toy2x2() -> SemanticNetwork {
    network(toy2x2_triples())
}

pub fn toy3_solo() -> SemanticNetwork {
    network(toy3_solo_triples())
}

pub fn fig10() -> SemanticNetwork {
    network(fig10_triples())
}

pub fn mixed() -> SemanticNetwork {
    network(mixed_triples())
}

fn edge(id: &str, direction: Direction, predicate: Node, target: &str) -> GrammarEdge {
    GrammarEdge {
        id: grammar_term(id),
        direction,
        predicate,
        target: grammar_term(target),
    }
}

fn traverse(id: &str, edges: Vec<GrammarEdge>) -> Rule {
    Rule::Traverse {
        id: grammar_term(id),
        edges,
    }
}

fn coaut_contexts(reresolve: Option<Rule>) -> Vec<Context> {
    let mut article = Context::new(
        grammar_term("ConferenceArticle_2"),
        lanl("ConferenceArticle"),
    );
    if let Some(r) = reresolve {
        article = article.rule(r);
    }
    article = article.rule(traverse(
        "Traverse_2",
        vec![edge(
            "InEdge_2",
            Direction::In,
            lanl("wrote"),
            "Researcher_3",
        )],
    ));
    vec![
        Context::new(grammar_term("University_0"), lanl("University"))
            .entry()
            .rule(Rule::SubmitCounts {
                id: grammar_term("SubmitCounts_0"),
            })
            .rule(traverse(
                "Traverse_0",
                vec![edge(
                    "InEdge_0",
                    Direction::In,
                    lanl("locatedAt"),
                    "Researcher_1",
                )],
            )),
        Context::new(grammar_term("Researcher_1"), lanl("Researcher"))
            .attribute(grammar_term("Is_1"), AttributeKind::Is, 2)
            .rule(Rule::IncrCount {
                id: grammar_term("IncrCount_1"),
            })
            .rule(traverse(
                "Traverse_1",
                vec![edge(
                    "OutEdge_1",
                    Direction::Out,
                    lanl("wrote"),
                    "ConferenceArticle_2",
                )],
            )),
        article,
        Context::new(grammar_term("Researcher_3"), lanl("Researcher"))
            .attribute(grammar_term("Not_3"), AttributeKind::Not, 2)
            .rule(Rule::IncrCount {
                id: grammar_term("IncrCount_3"),
            })
            .rule(traverse(
                "Traverse_3",
                vec![edge(
                    "OutEdge_3",
                    Direction::Out,
                    lanl("locatedAt"),
                    "University_0",
                )],
            )),
    ]
}

/// Eigenvector centrality over the conference-article coauthorship network
/// of university researchers.
pub fn coaut_grammar() -> Grammar {
    Grammar::new(coaut_contexts(None))
}

/// [`coaut_grammar`] with a 0.15 re-resolution of the last two steps at the
/// article context (PageRank).
pub fn coaut_prime_grammar() -> Grammar {
    Grammar::new(coaut_contexts(Some(Rule::Reresolve {
        id: grammar_term("Reresolve_2"),
        probability: 0.15,
        steps: 2,
        obeys: BTreeSet::new(),
    })))
}

/// PageRank over any network, ignoring labels and edge direction.
pub fn unlabeled_grammar() -> Grammar {
    let any = Node::iri(vocab::RDF_PROPERTY);
    Grammar::new(vec![Context::new(
        grammar_term("Resource_0"),
        Node::iri(vocab::RDFS_RESOURCE),
    )
    .entry()
    .rule(Rule::Reresolve {
        id: grammar_term("Reresolve_0"),
        probability: 0.15,
        steps: 0,
        obeys: BTreeSet::new(),
    })
    .rule(Rule::IncrCount {
        id: grammar_term("IncrCount_0"),
    })
    .rule(Rule::SubmitCounts {
        id: grammar_term("SubmitCounts_0"),
    })
    .rule(traverse(
        "Traverse_0",
        vec![
            edge("OutEdge_0", Direction::Out, any.clone(), "Resource_0"),
            edge("InEdge_0", Direction::In, any, "Resource_0"),
        ],
    ))])
}

/// Walks `omega` edges in both directions starting at `ex:a`.
pub fn fig10_grammar() -> Grammar {
    let w = ex("omega");
    let both = |n: &str, target: &str| {
        traverse(
            &format!("Traverse_{n}"),
            vec![
                edge(&format!("OutEdge_{n}"), Direction::Out, w.clone(), target),
                edge(&format!("InEdge_{n}"), Direction::In, w.clone(), target),
            ],
        )
    };
    Grammar::new(vec![
        Context::new(grammar_term("A_0"), ex("a"))
            .entry()
            .rule(both("0", "Any_1")),
        Context::new(grammar_term("Any_1"), Node::iri(vocab::RDFS_RESOURCE))
            .rule(Rule::IncrCount {
                id: grammar_term("IncrCount_1"),
            })
            .rule(Rule::SubmitCounts {
                id: grammar_term("SubmitCounts_1"),
            })
            .rule(both("1", "Any_1")),
    ])
}

fn grammar_text(g: &Grammar) -> String {
    let v = GrammarVocab::default();
    let triples = serialize_grammar(g, &v);
    let mut prefixes = PREFIXES.to_vec();
    prefixes.push(("ex", EX));
    prefixes.push(("rwr", v.base()));
    prefixes.push(("psi", PSI));
    serialize_prefixed(&triples, &prefixes)
}

fn network_text(triples: &[Triple], extra: &[(&'static str, &'static str)]) -> String {
    let mut prefixes = PREFIXES.to_vec();
    prefixes.extend_from_slice(extra);
    serialize_prefixed(triples, &prefixes)
}

pub fn coaut_grammar_text() -> String {
    grammar_text(&coaut_grammar())
}

pub fn unlabeled_grammar_text() -> String {
    grammar_text(&unlabeled_grammar())
}

/// Names accepted by [`example_text`] (plus `all` in the CLI).
pub const EXAMPLE_NAMES: &[&str] = &[
    "scholarly-ontology",
    "toy3",
    "toy2x2",
    "toy3-solo",
    "fig10",
    "mixed",
    "fig10-grammar",
    "coaut",
    "coaut-prime",
    "unlabeled",
];

/// Deterministic file contents for a named example.
pub fn example_text(name: &str) -> Option<String> {
    let text = match name {
        "scholarly-ontology" => network_text(&scholarly_ontology_triples(), &[]),
        "toy3" => network_text(&toy3_triples(), &[]),
        "toy2x2" => network_text(&toy2x2_triples(), &[]),
        "toy3-solo" => network_text(&toy3_solo_triples(), &[]),
        "fig10" => network_text(&fig10_triples(), &[("ex", EX)]),
        "mixed" => network_text(&mixed_triples(), &[("ex", EX)]),
        "fig10-grammar" => grammar_text(&fig10_grammar()),
        "coaut" => grammar_text(&coaut_grammar()),
        "coaut-prime" => grammar_text(&coaut_prime_grammar()),
        "unlabeled" => grammar_text(&unlabeled_grammar()),
        _ => return None,
    };
    Some(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_grammar, validate_grammar};
    use crate::graph::parse_triples;

    fn set(triples: Vec<Triple>) -> BTreeSet<Triple> {
        triples.into_iter().collect()
    }

    #[test]
    fn example_files_parse_to_their_fixtures() {
        let pairs = [
            ("scholarly-ontology", scholarly_ontology_triples()),
            ("toy3", toy3_triples()),
            ("toy2x2", toy2x2_triples()),
            ("toy3-solo", toy3_solo_triples()),
            ("fig10", fig10_triples()),
            ("mixed", mixed_triples()),
        ];
        for (name, triples) in pairs {
            let net = parse_triples(&example_text(name).unwrap()).unwrap();
            assert_eq!(set(net.iter().collect()), set(triples), "{name}");
        }
        let grammars = [
            ("coaut", coaut_grammar()),
            ("coaut-prime", coaut_prime_grammar()),
            ("unlabeled", unlabeled_grammar()),
            ("fig10-grammar", fig10_grammar()),
        ];
        for (name, g) in grammars {
            let net = parse_triples(&example_text(name).unwrap()).unwrap();
            assert_eq!(parse_grammar(&net).unwrap(), g, "{name}");
        }
    }

    #[test]
    fn examples_validate_cleanly() {
        let runs = [
            (coaut_grammar(), toy3()),
            (coaut_prime_grammar(), toy2x2()),
            (unlabeled_grammar(), mixed()),
            (fig10_grammar(), fig10()),
        ];
        for (g, net) in runs {
            let d = validate_grammar(&g, Some(&net));
            assert!(d.iter().all(|d| !d.is_error()), "{d:?}");
        }
    }

    #[test]
    fn coaut_prime_literals() {
        let text = example_text("coaut-prime").unwrap();
        assert!(
            text.contains("rwr:probability \"0.15\"^^xsd:decimal"),
            "{text}"
        );
        assert!(text.contains("rwr:steps \"2\"^^xsd:integer"), "{text}");
    }

    #[test]
    fn ontology_has_conference_subclass() {
        let text = example_text("scholarly-ontology").unwrap();
        assert!(text.contains("lanl:ConferenceArticle rdfs:subClassOf lanl:Article ."));
    }

    #[test]
    fn toy3_population() {
        let net = toy3();
        assert_eq!(net.instances_of(&lanl("University")).len(), 2);
        assert_eq!(net.instances_of(&lanl("Researcher")).len(), 3);
        assert_eq!(net.instances_of(&lanl("ConferenceArticle")).len(), 3);
    }
}
