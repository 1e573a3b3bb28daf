use crate::graph::Node;

pub const DEFAULT_NAMESPACE: &str = "urn:rwr:";

/// Grammar ontology terms under a configurable namespace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarVocab {
    base: String,
}

impl Default for GrammarVocab {
    fn default() -> Self {
        Self::new(DEFAULT_NAMESPACE)
    }
}

macro_rules! terms {
    ($($name:ident => $local:literal),* $(,)?) => {
        $(
            pub fn $name(&self) -> Node {
                self.term($local)
            }
        )*
    };
}

impl GrammarVocab {
    pub fn new(base: impl Into<String>) -> Self {
        GrammarVocab { base: base.into() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn term(&self, local: &str) -> Node {
        Node::iri(format!("{}{local}", self.base))
    }

    terms! {
        context => "Context",
        entry_context => "EntryContext",
        for_resource => "forResource",
        has_rules => "hasRules",
        traverse => "Traverse",
        has_edge => "hasEdge",
        out_edge => "OutEdge",
        in_edge => "InEdge",
        has_predicate => "hasPredicate",
        has_object => "hasObject",
        has_subject => "hasSubject",
        incr_count => "IncrCount",
        submit_counts => "SubmitCounts",
        reresolve => "Reresolve",
        probability => "probability",
        steps => "steps",
        obeys => "obeys",
        has_attributes => "hasAttributes",
        has_attribute => "hasAttribute",
        is => "Is",
        not => "Not",
    }
}
