//! Edge-labelled data graphs and their validation against schemas.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::rex::{bag_matches, InvalidLabel, Label, LabelBag, NotConflictFree};
use crate::schema::{GraphSchema, SchemaElement};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self, GraphError> {
        let id = id.into();
        if id.is_empty() {
            Err(GraphError::EmptyNodeId)
        } else {
            Ok(NodeId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for NodeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node ids must be non-empty")]
    EmptyNodeId,
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate edge {from} -{label}-> {to} (strict edge-set mode)")]
    DuplicateEdge {
        from: String,
        label: Label,
        to: String,
    },
    #[error(transparent)]
    InvalidLabel(#[from] InvalidLabel),
    #[error(transparent)]
    NotConflictFree(#[from] NotConflictFree),
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
}

/// A data graph `(V, E, ρ)`: nodes carry opaque string values and edges
/// form a multiset, so parallel edges with the same label are allowed.
#[derive(Debug, Clone, Default)]
pub struct DataGraph {
    ids: Vec<NodeId>,
    values: Vec<String>,
    index: HashMap<NodeId, usize>,
    edges: Vec<(usize, Label, usize)>,
}

#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<(String, String)>,
    edges: Vec<(String, Label, String)>,
}

impl GraphBuilder {
    pub fn node(mut self, id: impl Into<String>, value: impl Into<String>) -> Self {
        self.add_node(id, value);
        self
    }

    pub fn edge(mut self, from: impl Into<String>, label: Label, to: impl Into<String>) -> Self {
        self.add_edge(from, label, to);
        self
    }

    pub fn add_node(&mut self, id: impl Into<String>, value: impl Into<String>) {
        self.nodes.push((id.into(), value.into()));
    }

    pub fn add_edge(&mut self, from: impl Into<String>, label: Label, to: impl Into<String>) {
        self.edges.push((from.into(), label, to.into()));
    }

    pub fn build(self) -> Result<DataGraph, GraphError> {
        self.finish(false)
    }

    /// Builds a graph whose edge multiset must be a set.
    pub fn build_strict(self) -> Result<DataGraph, GraphError> {
        self.finish(true)
    }

    fn finish(self, strict: bool) -> Result<DataGraph, GraphError> {
        let mut g = DataGraph::default();
        for (id, value) in self.nodes {
            let id = NodeId::new(id)?;
            if g.index.contains_key(&id) {
                return Err(GraphError::DuplicateNode(id.0));
            }
            g.index.insert(id.clone(), g.ids.len());
            g.ids.push(id);
            g.values.push(value);
        }
        let lookup = |g: &DataGraph, id: &str| {
            g.index_of(id)
                .ok_or_else(|| GraphError::UnknownNode(id.to_string()))
        };
        let mut seen = std::collections::HashSet::new();
        for (from, label, to) in self.edges {
            let f = lookup(&g, &from)?;
            let t = lookup(&g, &to)?;
            if strict && !seen.insert((f, label.clone(), t)) {
                return Err(GraphError::DuplicateEdge { from, label, to });
            }
            g.edges.push((f, label, t));
        }
        Ok(g)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    nodes: Vec<NodeEntry>,
    edges: Vec<EdgeEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    from: String,
    label: String,
    to: String,
}

impl DataGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    /// Parses the JSON graph format. With `strict`, duplicate edges are
    /// rejected instead of counted.
    pub fn from_json(text: &str, strict: bool) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text)?;
        let mut b = GraphBuilder::default();
        for n in file.nodes {
            b.add_node(n.id, n.value);
        }
        for e in file.edges {
            b.add_edge(e.from, Label::new(e.label)?, e.to);
        }
        b.finish(strict)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let file = GraphFile {
            nodes: self
                .nodes()
                .map(|(id, value)| NodeEntry {
                    id: id.0.clone(),
                    value: value.to_string(),
                })
                .collect(),
            edges: self
                .edges()
                .map(|(f, l, t)| EdgeEntry {
                    from: f.0.clone(),
                    label: l.to_string(),
                    to: t.0.clone(),
                })
                .collect(),
        };
        serde_json::to_value(file).expect("graph file serializes")
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Nodes in insertion order with their values.
    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &str)> {
        self.ids.iter().zip(self.values.iter().map(String::as_str))
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &Label, &NodeId)> {
        self.edges
            .iter()
            .map(|(f, l, t)| (&self.ids[*f], l, &self.ids[*t]))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index_of(id).is_some()
    }

    pub fn value(&self, id: &str) -> Option<&str> {
        self.index_of(id).map(|i| self.values[i].as_str())
    }

    pub(crate) fn index_of(&self, id: &str) -> Option<usize> {
        // NodeId borrows as its inner string only through this lookup
        self.index.get(&NodeId(id.to_string())).copied()
    }

    pub(crate) fn raw_edges(&self) -> &[(usize, Label, usize)] {
        &self.edges
    }

    fn require(&self, id: &str) -> Result<usize, GraphError> {
        self.index_of(id)
            .ok_or_else(|| GraphError::UnknownNode(id.to_string()))
    }

    /// Labels of the edges entering `v`, with multiplicity.
    pub fn in_bag(&self, v: &str) -> Result<LabelBag, GraphError> {
        let i = self.require(v)?;
        Ok(self.in_bag_at(i))
    }

    /// Labels of the edges leaving `v`, with multiplicity.
    pub fn out_bag(&self, v: &str) -> Result<LabelBag, GraphError> {
        let i = self.require(v)?;
        Ok(self.out_bag_at(i))
    }

    pub(crate) fn in_bag_at(&self, i: usize) -> LabelBag {
        self.edges
            .iter()
            .filter(|(_, _, t)| *t == i)
            .map(|(_, l, _)| l.clone())
            .collect()
    }

    pub(crate) fn out_bag_at(&self, i: usize) -> LabelBag {
        self.edges
            .iter()
            .filter(|(f, _, _)| *f == i)
            .map(|(_, l, _)| l.clone())
            .collect()
    }
}

/// Whether `v`'s incoming and outgoing label bags match `e`.
pub fn node_in_element(g: &DataGraph, v: &str, e: &SchemaElement) -> Result<bool, GraphError> {
    let in_ok = bag_matches(&g.in_bag(v)?, &e.in_re)?;
    Ok(in_ok && bag_matches(&g.out_bag(v)?, &e.out_re)?)
}

/// Assignment of schema elements to the nodes of a graph.
///
/// When the schema does not separate two elements (see
/// [`crate::schema::check_condition_3`]) a node may match several; it is
/// assigned the first in schema order and the full candidate list is kept
/// in `ambiguous`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Typing {
    pub assignment: BTreeMap<NodeId, String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub ambiguous: BTreeMap<NodeId, Vec<String>>,
}

impl Typing {
    pub fn element_of(&self, v: &str) -> Option<&str> {
        self.assignment
            .get(&NodeId(v.to_string()))
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UntypableNode {
    pub node: NodeId,
    pub in_bag: LabelBag,
    pub out_bag: LabelBag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("{} node(s) match no schema element", untypable.len())]
pub struct ValidationFailure {
    pub untypable: Vec<UntypableNode>,
}

/// Types every node of `g` with an element of `s`, or reports the nodes
/// that no element describes.
pub fn validate(g: &DataGraph, s: &GraphSchema) -> Result<Typing, ValidationFailure> {
    let mut typing = Typing::default();
    let mut untypable = Vec::new();
    for (i, id) in g.ids.iter().enumerate() {
        let in_bag = g.in_bag_at(i);
        let out_bag = g.out_bag_at(i);
        let candidates: Vec<String> = (0..s.len())
            .filter(|&k| s.norm_in(k).matches(&in_bag) && s.norm_out(k).matches(&out_bag))
            .map(|k| s.name(k).to_string())
            .collect();
        match candidates.first() {
            None => untypable.push(UntypableNode {
                node: id.clone(),
                in_bag,
                out_bag,
            }),
            Some(first) => {
                typing.assignment.insert(id.clone(), first.clone());
                if candidates.len() > 1 {
                    typing.ambiguous.insert(id.clone(), candidates);
                }
            }
        }
    }
    if untypable.is_empty() {
        Ok(typing)
    } else {
        Err(ValidationFailure { untypable })
    }
}
