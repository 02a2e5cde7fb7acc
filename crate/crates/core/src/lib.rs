//! Schemas for edge-labelled data graphs, with path-query evaluation and
//! schema-level type inference.
//!
//! Element types constrain the bag of incoming and outgoing edge labels of
//! each node with unordered-concatenation regexes ([`rex`]). A schema
//! ([`schema`]) is checked for conflict-freedom, dangling labels and
//! well-formedness; well-formed schemas always admit a conforming graph.
//! Queries ([`query`]) range over regular path queries, nested regular
//! expressions and a navigational XPath-like fragment; [`typing`] infers the
//! pairs of element types a query can connect, which decides satisfiability
//! for RPQs. [`emptiness`] encodes schemas as diophantine systems.

mod matrix;
mod syntax;

pub mod emptiness;
pub mod fixtures;
pub mod graph;
pub mod query;
pub mod rex;
pub mod schema;
pub mod typing;

pub use graph::{validate, DataGraph, NodeId, Typing};
pub use query::{eval, parse_query, Language, Query};
pub use rex::{parse_regex, Label, LabelBag, Regex};
pub use schema::{check_well_formed, witness_graph, GraphSchema, RawSchema, SchemaElement};
pub use syntax::SyntaxError;
pub use typing::{infer, sat, PairSet, SatVerdict};
