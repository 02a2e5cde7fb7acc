//! Small schemas and graphs used throughout the documentation and tests.
//!
//! Node ids of the bibliography graph coincide with node values.

use crate::graph::{DataGraph, GraphBuilder};
use crate::rex::Label;
use crate::schema::{GraphSchema, RawSchema, SchemaElement};

fn l(s: &str) -> Label {
    Label::new(s).expect("fixture labels are valid")
}

fn raw(elements: &[(&str, &str, &str)]) -> RawSchema {
    RawSchema::new(
        elements
            .iter()
            .map(|(n, i, o)| SchemaElement::parse(n, i, o).expect("fixture regexes parse"))
            .collect(),
    )
    .expect("fixture names are unique")
}

fn cf(elements: &[(&str, &str, &str)]) -> GraphSchema {
    GraphSchema::parse(elements).expect("fixture schemas are conflict-free")
}

const DBLP_NODES: [&str; 8] = [
    "jacm",
    "HopcroftT74",
    "Robert Endre Tarjan",
    "focs",
    "FOCS8",
    "HopcroftU67a",
    "John E. Hopcroft",
    "Jeffrey D. Ullman",
];

const DBLP_EDGES: [(&str, &str, &str); 7] = [
    ("HopcroftT74", "journal", "jacm"),
    ("HopcroftT74", "creator", "Robert Endre Tarjan"),
    ("HopcroftT74", "creator", "John E. Hopcroft"),
    ("FOCS8", "series", "focs"),
    ("HopcroftU67a", "partOf", "FOCS8"),
    ("HopcroftU67a", "creator", "John E. Hopcroft"),
    ("HopcroftU67a", "creator", "Jeffrey D. Ullman"),
];

/// Builder preloaded with the bibliography graph, for tests that tweak it.
pub fn dblp_builder() -> GraphBuilder {
    let mut b = DataGraph::builder();
    for n in DBLP_NODES {
        b.add_node(n, n);
    }
    for (from, label, to) in DBLP_EDGES {
        b.add_edge(from, l(label), to);
    }
    b
}

/// Two papers, their authors, a journal and a conference series.
pub fn dblp_graph() -> DataGraph {
    dblp_builder().build().expect("fixture graph is consistent")
}

/// Schema typing [`dblp_graph`]: papers, journals, proceedings, series and
/// authors.
pub fn dblp_schema() -> GraphSchema {
    cf(&[
        ("e1", "eps", "(journal | partOf) . creator+"),
        ("e2", "journal*", "eps"),
        ("e3", "partOf*", "series"),
        ("e4", "series*", "eps"),
        ("e5", "creator*", "eps"),
    ])
}

/// A schema on which `[b] . a . c` types as `(e1, e4)` although no
/// conforming graph has a node emitting both `a` and `b`.
pub fn counterexample_schema() -> GraphSchema {
    cf(&[
        ("e1", "eps", "a | b"),
        ("e2", "a*", "c"),
        ("e3", "b*", "d"),
        ("e4", "c*", "eps"),
        ("e5", "d*", "eps"),
    ])
}

/// Seven nodes: an `a`-cycle through `1a, 3a, 1b, 7`, plus side edges.
pub fn cycle_graph() -> DataGraph {
    let mut b = DataGraph::builder();
    for n in ["1a", "3a", "7", "1b", "5", "2", "3b"] {
        b.add_node(n, n);
    }
    for (from, label, to) in [
        ("1a", "a", "3a"),
        ("3a", "a", "1b"),
        ("7", "a", "1a"),
        ("7", "d", "5"),
        ("1b", "a", "7"),
        ("1b", "b", "2"),
        ("1b", "c", "3b"),
    ] {
        b.add_edge(from, l(label), to);
    }
    b.build().expect("fixture graph is consistent")
}

/// Star-free, not conflict-free, and empty: each producer emits two `c`
/// edges for one of each other label.
pub fn empty_star_free_schema() -> RawSchema {
    raw(&[("e1", "eps", "a . b . c . c"), ("e2", "a . b . c", "eps")])
}

/// Star-free and non-empty, with a smallest graph of 7 nodes.
pub fn nonempty_star_free_schema() -> RawSchema {
    raw(&[
        ("e1", "eps", "a . b . c . c . c . c"),
        ("e2", "a . b . c", "eps"),
        ("e3", "c . c", "eps"),
    ])
}

/// Like [`nonempty_star_free_schema`] with repeated groups.
pub fn starred_schema() -> RawSchema {
    raw(&[
        ("e1", "eps", "a . b . (c . c . c . c)*"),
        ("e2", "(a . b . c)*", "eps"),
        ("e3", "c . c", "eps"),
    ])
}

/// Nested stars, giving equations of degree four.
pub fn nested_star_schema() -> RawSchema {
    raw(&[
        ("e1", "eps", "(a . (b . (c . c . c . c)*)*)*"),
        ("e2", "(a . b . c)*", "eps"),
        ("e3", "c . c", "eps"),
    ])
}
