//! Graph schemas: elements constraining incoming and outgoing edge bags.
//!
//! A [`RawSchema`] is whatever the schema file says. A [`GraphSchema`] has
//! passed the conflict-free gate and caches the normal forms of its
//! regexes; every analysis past conditions 1 and 2 works on it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DataGraph, NodeId, Typing};
use crate::rex::{norm, parse_regex, Atom, CfViolation, Clause, DnfRegex, Label, LabelBag, Regex};
use crate::syntax::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    In,
    Out,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::In => "in",
            Side::Out => "out",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaElement {
    pub name: String,
    pub in_re: Regex,
    pub out_re: Regex,
}

impl SchemaElement {
    pub fn new(name: impl Into<String>, in_re: Regex, out_re: Regex) -> Self {
        SchemaElement {
            name: name.into(),
            in_re,
            out_re,
        }
    }

    /// Builds an element from regexes in surface syntax.
    pub fn parse(name: &str, in_re: &str, out_re: &str) -> Result<Self, SchemaError> {
        let parse = |side, text: &str| {
            parse_regex(text).map_err(|error| SchemaError::Syntax {
                element: name.to_string(),
                side,
                error,
            })
        };
        Ok(SchemaElement::new(
            name,
            parse(Side::In, in_re)?,
            parse(Side::Out, out_re)?,
        ))
    }

    pub fn regex(&self, side: Side) -> &Regex {
        match side {
            Side::In => &self.in_re,
            Side::Out => &self.out_re,
        }
    }
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed schema file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("element `{element}`, {side} regex: {error}")]
    Syntax {
        element: String,
        side: Side,
        error: SyntaxError,
    },
    #[error("element names must be non-empty")]
    EmptyName,
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
    #[error("element `{element}`, {side} regex `{regex}` is not conflict-free: {violation}")]
    NotConflictFree {
        element: String,
        side: Side,
        regex: String,
        violation: CfViolation,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    elements: Vec<ElementEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementEntry {
    name: String,
    #[serde(rename = "in")]
    in_re: String,
    out: String,
}

/// A parsed schema with unique element names and no other guarantees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSchema {
    elements: Vec<SchemaElement>,
}

impl RawSchema {
    pub fn new(elements: Vec<SchemaElement>) -> Result<Self, SchemaError> {
        let mut seen = BTreeSet::new();
        for e in &elements {
            if e.name.is_empty() {
                return Err(SchemaError::EmptyName);
            }
            if !seen.insert(e.name.as_str()) {
                return Err(SchemaError::DuplicateName(e.name.clone()));
            }
        }
        Ok(RawSchema { elements })
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let file: SchemaFile = serde_json::from_str(text)?;
        let elements = file
            .elements
            .iter()
            .map(|e| SchemaElement::parse(&e.name, &e.in_re, &e.out))
            .collect::<Result<_, _>>()?;
        RawSchema::new(elements)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let file = SchemaFile {
            elements: self
                .elements
                .iter()
                .map(|e| ElementEntry {
                    name: e.name.clone(),
                    in_re: e.in_re.to_string(),
                    out: e.out_re.to_string(),
                })
                .collect(),
        };
        serde_json::to_value(file).expect("schema file serializes")
    }

    pub fn elements(&self) -> &[SchemaElement] {
        &self.elements
    }
}

/// A schema whose regexes are all conflict-free.
#[derive(Debug, Clone)]
pub struct GraphSchema {
    elements: Vec<SchemaElement>,
    names: Arc<[String]>,
    index: HashMap<String, usize>,
    sym_in: Vec<BTreeSet<Label>>,
    sym_out: Vec<BTreeSet<Label>>,
    norm_in: Vec<DnfRegex>,
    norm_out: Vec<DnfRegex>,
}

impl GraphSchema {
    pub fn new(elements: Vec<SchemaElement>) -> Result<Self, SchemaError> {
        GraphSchema::try_from(RawSchema::new(elements)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        GraphSchema::try_from(RawSchema::from_json(text)?)
    }

    /// Convenience for `(name, in, out)` triples in surface syntax.
    pub fn parse(elements: &[(&str, &str, &str)]) -> Result<Self, SchemaError> {
        let elements = elements
            .iter()
            .map(|(n, i, o)| SchemaElement::parse(n, i, o))
            .collect::<Result<_, _>>()?;
        GraphSchema::new(elements)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[SchemaElement] {
        &self.elements
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn sym_in(&self, i: usize) -> &BTreeSet<Label> {
        &self.sym_in[i]
    }

    pub fn sym_out(&self, i: usize) -> &BTreeSet<Label> {
        &self.sym_out[i]
    }

    pub fn norm_in(&self, i: usize) -> &DnfRegex {
        &self.norm_in[i]
    }

    pub fn norm_out(&self, i: usize) -> &DnfRegex {
        &self.norm_out[i]
    }

    /// All labels used by the schema.
    pub fn alphabet(&self) -> BTreeSet<Label> {
        self.sym_in
            .iter()
            .chain(&self.sym_out)
            .flatten()
            .cloned()
            .collect()
    }

    pub fn to_raw(&self) -> RawSchema {
        RawSchema {
            elements: self.elements.clone(),
        }
    }
}

impl TryFrom<RawSchema> for GraphSchema {
    type Error = SchemaError;

    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        let mut norm_in = Vec::with_capacity(raw.elements.len());
        let mut norm_out = Vec::with_capacity(raw.elements.len());
        for e in &raw.elements {
            for side in [Side::In, Side::Out] {
                let dnf = norm(e.regex(side)).map_err(|err| SchemaError::NotConflictFree {
                    element: e.name.clone(),
                    side,
                    regex: err.regex,
                    violation: err.violation,
                })?;
                match side {
                    Side::In => norm_in.push(dnf),
                    Side::Out => norm_out.push(dnf),
                }
            }
        }
        let names: Arc<[String]> = raw.elements.iter().map(|e| e.name.clone()).collect();
        Ok(GraphSchema {
            index: names
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, n)| (n, i))
                .collect(),
            names,
            sym_in: raw.elements.iter().map(|e| e.in_re.sym_set()).collect(),
            sym_out: raw.elements.iter().map(|e| e.out_re.sym_set()).collect(),
            norm_in,
            norm_out,
            elements: raw.elements,
        })
    }
}

// --- reports ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not evaluated because an earlier gate failed.
    Skipped,
}

impl Status {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CfEntry {
    pub element: String,
    pub side: Side,
    pub regex: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CfReport {
    pub status: Status,
    pub violations: Vec<CfEntry>,
}

/// Conditions 1 and 2: no label is received without being emitted
/// somewhere, and vice versa.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DanglingReport {
    pub status: Status,
    /// Labels in some `in` regex but in no `out` regex.
    pub never_emitted: Vec<Label>,
    /// Labels in some `out` regex but in no `in` regex.
    pub never_received: Vec<Label>,
}

/// Two elements that both describe nodes with these edge bags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Overlap {
    pub left: String,
    pub right: String,
    pub in_bag: LabelBag,
    pub out_bag: LabelBag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisjointnessReport {
    pub status: Status,
    pub overlaps: Vec<Overlap>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionsReport {
    pub conditions_1_2: DanglingReport,
    pub condition_3: DisjointnessReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WfViolation {
    pub label: Label,
    pub entry: String,
    pub side: Side,
    pub atom: Atom,
}

impl fmt::Display for WfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (role, other) = match self.side {
            Side::In => ("received", "emitted"),
            Side::Out => ("emitted", "received"),
        };
        write!(
            f,
            "`{}` is {} by several entries but {} as {:?} by `{}`",
            self.label, other, role, self.atom, self.entry
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WellFormedReport {
    pub status: Status,
    pub violations: Vec<WfViolation>,
}

/// Outcome of every schema gate.
///
/// `accepted` requires conflict-freedom, conditions 1 and 2, and
/// well-formedness. Condition 3 overlaps are reported but do not block
/// acceptance: they only mean some nodes can be typed by more than one
/// element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaReport {
    pub accepted: bool,
    pub conflict_free: CfReport,
    pub conditions_1_2: DanglingReport,
    pub condition_3: DisjointnessReport,
    pub well_formed: WellFormedReport,
}

// --- conditions -----------------------------------------------------------

pub fn check_conflict_free(elements: &[SchemaElement]) -> CfReport {
    let mut violations = Vec::new();
    for e in elements {
        for side in [Side::In, Side::Out] {
            if let Err(v) = e.regex(side).check_conflict_free() {
                violations.push(CfEntry {
                    element: e.name.clone(),
                    side,
                    regex: e.regex(side).to_string(),
                    reason: v.to_string(),
                });
            }
        }
    }
    CfReport {
        status: Status::from_ok(violations.is_empty()),
        violations,
    }
}

/// Conditions 1 and 2. Defined on arbitrary regexes.
pub fn check_conditions_1_2(elements: &[SchemaElement]) -> DanglingReport {
    let ins: BTreeSet<Label> = elements.iter().flat_map(|e| e.in_re.sym_set()).collect();
    let outs: BTreeSet<Label> = elements.iter().flat_map(|e| e.out_re.sym_set()).collect();
    let never_emitted: Vec<Label> = ins.difference(&outs).cloned().collect();
    let never_received: Vec<Label> = outs.difference(&ins).cloned().collect();
    DanglingReport {
        status: Status::from_ok(never_emitted.is_empty() && never_received.is_empty()),
        never_emitted,
        never_received,
    }
}

/// Condition 3 over pairs of distinct elements: their `in` languages or
/// their `out` languages must be disjoint.
pub fn check_condition_3(s: &GraphSchema) -> DisjointnessReport {
    let mut overlaps = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let Some(in_bag) = s.norm_in(i).intersects(s.norm_in(j)) else {
                continue;
            };
            let Some(out_bag) = s.norm_out(i).intersects(s.norm_out(j)) else {
                continue;
            };
            overlaps.push(Overlap {
                left: s.name(i).to_string(),
                right: s.name(j).to_string(),
                in_bag,
                out_bag,
            });
        }
    }
    DisjointnessReport {
        status: Status::from_ok(overlaps.is_empty()),
        overlaps,
    }
}

pub fn check_conditions(s: &GraphSchema) -> ConditionsReport {
    ConditionsReport {
        conditions_1_2: check_conditions_1_2(s.elements()),
        condition_3: check_condition_3(s),
    }
}

// --- double normalisation ------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedEntry {
    /// `origin#i.j`, with 1-based clause indices.
    pub name: String,
    /// Index of the source element in its schema.
    pub origin: usize,
    pub origin_name: String,
    pub in_clause: Clause,
    pub out_clause: Clause,
}

impl NormalizedEntry {
    pub fn clause(&self, side: Side) -> &Clause {
        match side {
            Side::In => &self.in_clause,
            Side::Out => &self.out_clause,
        }
    }
}

/// A schema split along the unions of its normalized regexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedSchema {
    entries: Vec<NormalizedEntry>,
}

impl NormalizedSchema {
    pub fn entries(&self) -> &[NormalizedEntry] {
        &self.entries
    }

    /// The entries generated by source element `origin`.
    pub fn preimage<'a>(
        &'a self,
        origin: &'a str,
    ) -> impl Iterator<Item = &'a NormalizedEntry> + 'a {
        self.entries.iter().filter(move |e| e.origin_name == origin)
    }

    /// Entries that use `label` on `side`, with its atom.
    fn users(&self, label: &Label, side: Side) -> Vec<(usize, Atom)> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(k, e)| e.clause(side).atom(label).map(|a| (k, a)))
            .collect()
    }

    fn alphabet(&self) -> BTreeSet<Label> {
        self.entries
            .iter()
            .flat_map(|e| e.in_clause.labels().chain(e.out_clause.labels()))
            .cloned()
            .collect()
    }
}

pub fn dnorm(s: &GraphSchema) -> NormalizedSchema {
    let mut entries = Vec::new();
    for k in 0..s.len() {
        for (i, c) in s.norm_in(k).clauses().iter().enumerate() {
            for (j, d) in s.norm_out(k).clauses().iter().enumerate() {
                entries.push(NormalizedEntry {
                    name: format!("{}#{}.{}", s.name(k), i + 1, j + 1),
                    origin: k,
                    origin_name: s.name(k).to_string(),
                    in_clause: c.clone(),
                    out_clause: d.clone(),
                });
            }
        }
    }
    NormalizedSchema { entries }
}

/// Well-formedness of a normalized schema: a label emitted (received) by
/// two or more entries may only be received (emitted) under a star.
pub fn check_well_formedness(d: &NormalizedSchema) -> WellFormedReport {
    let mut violations = Vec::new();
    for label in d.alphabet() {
        for (shared, constrained) in [(Side::Out, Side::In), (Side::In, Side::Out)] {
            if d.users(&label, shared).len() < 2 {
                continue;
            }
            for (k, atom) in d.users(&label, constrained) {
                if atom != Atom::Star {
                    violations.push(WfViolation {
                        label: label.clone(),
                        entry: d.entries[k].name.clone(),
                        side: constrained,
                        atom,
                    });
                }
            }
        }
    }
    WellFormedReport {
        status: Status::from_ok(violations.is_empty()),
        violations,
    }
}

/// Runs every gate on a raw schema: conflict-freedom, conditions 1-3 and
/// well-formedness. Checks that need conflict-free input are skipped when
/// that gate fails.
pub fn check_well_formed(raw: &RawSchema) -> SchemaReport {
    let conflict_free = check_conflict_free(raw.elements());
    let conditions_1_2 = check_conditions_1_2(raw.elements());
    let (condition_3, well_formed) = match GraphSchema::try_from(raw.clone()) {
        Ok(s) => (check_condition_3(&s), check_well_formedness(&dnorm(&s))),
        Err(_) => (
            DisjointnessReport {
                status: Status::Skipped,
                overlaps: Vec::new(),
            },
            WellFormedReport {
                status: Status::Skipped,
                violations: Vec::new(),
            },
        ),
    };
    let accepted = conflict_free.status == Status::Pass
        && conditions_1_2.status == Status::Pass
        && well_formed.status == Status::Pass;
    SchemaReport {
        accepted,
        conflict_free,
        conditions_1_2,
        condition_3,
        well_formed,
    }
}

pub fn check_schema(s: &GraphSchema) -> SchemaReport {
    check_well_formed(&s.to_raw())
}

// --- witness construction ------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("schema is not well-formed: {}", join(.0))]
    NotWellFormed(Vec<WfViolation>),
    #[error("label `{0}` is emitted but never received, or the reverse")]
    Dangling(Label),
    #[error("no degree assignment satisfies label `{0}`")]
    Infeasible(Label),
}

fn join(items: &[WfViolation]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A conforming graph together with the element each node was built for.
#[derive(Debug, Clone)]
pub struct Witness {
    pub graph: DataGraph,
    pub typing: Typing,
}

/// Builds a graph conforming to a well-formed schema with one node per
/// normalized entry. Node `nK` stands for the K-th entry of [`dnorm`] and
/// carries the entry name as its value; every node has at least one edge
/// for each label of its clauses.
pub fn witness_graph(s: &GraphSchema) -> Result<Witness, WitnessError> {
    let dangling = check_conditions_1_2(s.elements());
    if let Some(l) = dangling
        .never_emitted
        .first()
        .or(dangling.never_received.first())
    {
        return Err(WitnessError::Dangling(l.clone()));
    }
    let d = dnorm(s);
    let wf = check_well_formedness(&d);
    if wf.status != Status::Pass {
        return Err(WitnessError::NotWellFormed(wf.violations));
    }

    let node = |k: usize| format!("n{}", k + 1);
    let mut b = DataGraph::builder();
    let mut typing = Typing::default();
    for (k, e) in d.entries().iter().enumerate() {
        b.add_node(node(k), e.name.clone());
        typing.assignment.insert(
            NodeId::new(node(k)).expect("non-empty"),
            e.origin_name.clone(),
        );
    }
    for label in d.alphabet() {
        let producers = d.users(&label, Side::Out);
        let consumers = d.users(&label, Side::In);
        for (from, to) in assign_label(&producers, &consumers)
            .ok_or_else(|| WitnessError::Infeasible(label.clone()))?
        {
            b.add_edge(node(from), label.clone(), node(to));
        }
    }
    let graph = b.build().expect("witness nodes are declared");
    Ok(Witness { graph, typing })
}

/// Pairs producer and consumer slots for one label. Each participant gets
/// one edge; the surplus on the smaller side goes to a participant whose
/// atom allows repetition, preferring `*`.
fn assign_label(
    producers: &[(usize, Atom)],
    consumers: &[(usize, Atom)],
) -> Option<Vec<(usize, usize)>> {
    if producers.is_empty() && consumers.is_empty() {
        return Some(Vec::new());
    }
    if producers.is_empty() || consumers.is_empty() {
        return None;
    }
    let total = producers.len().max(consumers.len());
    let out_slots = slots(producers, total)?;
    let in_slots = slots(consumers, total)?;
    Some(out_slots.into_iter().zip(in_slots).collect())
}

fn slots(users: &[(usize, Atom)], total: usize) -> Option<Vec<usize>> {
    let extra = total - users.len();
    let sink = users
        .iter()
        .find(|(_, a)| *a == Atom::Star)
        .or_else(|| users.iter().find(|(_, a)| *a == Atom::Plus));
    if extra > 0 && sink.is_none() {
        return None;
    }
    let mut out = Vec::with_capacity(total);
    for &(k, _) in users {
        out.push(k);
        if sink.is_some_and(|&(s, _)| s == k) {
            out.extend(std::iter::repeat_n(k, extra));
        }
    }
    Some(out)
}

// --- schema paths ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown schema element `{0}`")]
pub struct UnknownElement(pub String);

/// Whether `p` leads from element `from` to element `to`, each step
/// following a label emitted by the current element and received by the
/// next.
pub fn connected_in_schema(
    s: &GraphSchema,
    from: &str,
    to: &str,
    p: &[Label],
) -> Result<bool, UnknownElement> {
    let idx = |n: &str| s.index_of(n).ok_or_else(|| UnknownElement(n.to_string()));
    let (start, goal) = (idx(from)?, idx(to)?);
    Ok(schema_path_targets(s, start, p).contains(&goal))
}

/// Elements reachable from `start` along `p`.
pub fn schema_path_targets(s: &GraphSchema, start: usize, p: &[Label]) -> BTreeSet<usize> {
    let mut frontier = BTreeSet::from([start]);
    for a in p {
        let emitters = frontier.iter().any(|&k| s.sym_out(k).contains(a));
        frontier = if emitters {
            (0..s.len()).filter(|&k| s.sym_in(k).contains(a)).collect()
        } else {
            BTreeSet::new()
        };
        if frontier.is_empty() {
            break;
        }
    }
    frontier
}

/// Entries of `d` grouped by origin name, in entry order.
pub fn entries_by_origin(d: &NormalizedSchema) -> BTreeMap<&str, Vec<&NormalizedEntry>> {
    let mut out: BTreeMap<&str, Vec<&NormalizedEntry>> = BTreeMap::new();
    for e in d.entries() {
        out.entry(e.origin_name.as_str()).or_default().push(e);
    }
    out
}
