//! Grammar-constrained random walkers on semantic networks.
//!
//! A [`grammar::Grammar`] restricts which labelled edges a walker may cross
//! and where it counts visits. Running many walkers over a
//! [`graph::SemanticNetwork`] yields grammar-based eigenvector centrality,
//! or PageRank when the grammar re-resolves its path. The [`oracle`] module
//! computes the same quantities exactly on small inputs.

pub mod fixtures;
pub mod grammar;
pub mod graph;
pub mod oracle;
pub mod output;
pub mod vocab;
pub mod walker;
