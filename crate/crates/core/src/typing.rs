//! Schema-level type inference for path queries.
//!
//! [`infer`] computes a set of element pairs that bounds, on every graph
//! conforming to the schema, the types of the node pairs a query returns.
//! For RPQs the bound is tight enough to decide satisfiability.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::matrix::BitMatrix;
use crate::query::{Language, Query};
use crate::rex::Label;
use crate::schema::{GraphSchema, UnknownElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pair sets belong to different schemas")]
pub struct SchemaMismatch;

/// A relation over the elements of one schema.
#[derive(Clone, PartialEq, Eq)]
pub struct PairSet {
    names: Arc<[String]>,
    rel: BitMatrix,
}

impl PairSet {
    fn with(s: &GraphSchema, rel: BitMatrix) -> Self {
        PairSet {
            names: s.names().clone(),
            rel,
        }
    }

    pub fn empty(s: &GraphSchema) -> Self {
        PairSet::with(s, BitMatrix::empty(s.len()))
    }

    /// Every element paired with itself.
    pub fn identity(s: &GraphSchema) -> Self {
        PairSet::with(s, BitMatrix::identity(s.len()))
    }

    pub fn from_pairs(s: &GraphSchema, pairs: &[(&str, &str)]) -> Result<Self, UnknownElement> {
        let idx = |n: &str| s.index_of(n).ok_or_else(|| UnknownElement(n.to_string()));
        let pairs = pairs
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>, UnknownElement>>()?;
        Ok(PairSet::with(s, BitMatrix::from_pairs(s.len(), pairs)))
    }

    pub fn len(&self) -> usize {
        self.rel.count()
    }

    pub fn is_empty(&self) -> bool {
        self.rel.is_empty()
    }

    pub fn contains(&self, from: &str, to: &str) -> bool {
        let idx = |n: &str| self.names.iter().position(|m| m == n);
        match (idx(from), idx(to)) {
            (Some(i), Some(j)) => self.rel.get(i, j),
            _ => false,
        }
    }

    /// Pairs sorted by element name.
    pub fn pairs(&self) -> Vec<(&str, &str)> {
        let mut out: Vec<(&str, &str)> = self
            .rel
            .pairs()
            .map(|(i, j)| (self.names[i].as_str(), self.names[j].as_str()))
            .collect();
        out.sort_unstable();
        out
    }

    /// Pairs as element indices, in schema order.
    pub fn index_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rel.pairs()
    }

    pub fn is_subset(&self, other: &PairSet) -> Result<bool, SchemaMismatch> {
        self.check(other)?;
        Ok(self.rel.is_subset(&other.rel))
    }

    fn check(&self, other: &PairSet) -> Result<(), SchemaMismatch> {
        if Arc::ptr_eq(&self.names, &other.names) || self.names == other.names {
            Ok(())
        } else {
            Err(SchemaMismatch)
        }
    }

    fn lift(&self, rel: BitMatrix) -> PairSet {
        PairSet {
            names: self.names.clone(),
            rel,
        }
    }

    pub fn union(&self, other: &PairSet) -> Result<PairSet, SchemaMismatch> {
        self.check(other)?;
        Ok(self.lift(self.rel.union(&other.rel)))
    }

    pub fn intersection(&self, other: &PairSet) -> Result<PairSet, SchemaMismatch> {
        self.check(other)?;
        Ok(self.lift(self.rel.intersection(&other.rel)))
    }

    /// `{(a, c) | (a, b) in self, (b, c) in other}`.
    pub fn compose(&self, other: &PairSet) -> Result<PairSet, SchemaMismatch> {
        self.check(other)?;
        Ok(self.lift(self.rel.compose(&other.rel)))
    }

    /// Smallest superset that contains the identity over all elements and
    /// is closed under composition with `self`.
    pub fn reflexive_transitive_closure(&self) -> PairSet {
        self.lift(self.rel.warshall())
    }

    /// Union of the `i`-fold compositions for `m <= i <= n`.
    ///
    /// # Panics
    /// If `n < m`.
    pub fn bounded_closure(&self, m: u64, n: u64) -> PairSet {
        self.lift(self.rel.power_range(m, n))
    }

    /// Elements with at least one successor.
    pub fn first(&self) -> BTreeSet<&str> {
        self.rel
            .pairs()
            .map(|(i, _)| self.names[i].as_str())
            .collect()
    }

    fn first_square(&self) -> PairSet {
        let n = self.names.len();
        let starts: Vec<usize> = (0..n)
            .filter(|&i| self.rel.pairs().any(|(a, _)| a == i))
            .collect();
        let pairs = starts
            .iter()
            .flat_map(|&i| starts.iter().map(move |&j| (i, j)));
        self.lift(BitMatrix::from_pairs(n, pairs))
    }
}

impl fmt::Debug for PairSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

impl fmt::Display for PairSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (a, b)) in self.pairs().into_iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({a}, {b})")?;
        }
        f.write_str("}")
    }
}

impl Serialize for PairSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs = self.pairs();
        let mut seq = serializer.serialize_seq(Some(pairs.len()))?;
        for (a, b) in pairs {
            seq.serialize_element(&[a, b])?;
        }
        seq.end()
    }
}

fn label_pairs(s: &GraphSchema, linked: impl Fn(usize, usize) -> bool) -> PairSet {
    let n = s.len();
    let pairs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    PairSet::with(
        s,
        BitMatrix::from_pairs(n, pairs.filter(|&(i, j)| linked(i, j))),
    )
}

fn emits_to(s: &GraphSchema, i: usize, j: usize, a: &Label) -> bool {
    s.sym_out(i).contains(a) && s.sym_in(j).contains(a)
}

/// The inferred pair set of `q` over `s`, by structural recursion on `q`.
///
/// The rules only read the label sets of each element, so any schema is
/// accepted; the result bounds query answers on conforming graphs when the
/// schema is well-formed.
pub fn infer(s: &GraphSchema, q: &Query) -> PairSet {
    let same = "inferred sets share the schema";
    match q {
        Query::Eps => PairSet::identity(s),
        Query::Fwd(a) => label_pairs(s, |i, j| emits_to(s, i, j, a)),
        Query::Bwd(a) => label_pairs(s, |i, j| emits_to(s, j, i, a)),
        Query::Any => label_pairs(s, |i, j| !s.sym_out(i).is_disjoint(s.sym_in(j))),
        Query::Union(l, r) => infer(s, l).union(&infer(s, r)).expect(same),
        Query::Concat(l, r) => infer(s, l).compose(&infer(s, r)).expect(same),
        Query::Inter(l, r) => infer(s, l).intersection(&infer(s, r)).expect(same),
        Query::Star(q) => infer(s, q).reflexive_transitive_closure(),
        Query::Count(q, m, n) => infer(s, q).bounded_closure(*m, *n),
        Query::Test(q) => infer(s, q).first_square(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SatVerdict {
    /// Some conforming graph gives a non-empty answer.
    Sat,
    /// Every conforming graph gives the empty answer.
    Unsat,
    /// Inference is non-empty but only sound for this language.
    UnknownNonempty,
}

impl fmt::Display for SatVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SatVerdict::Sat => "SAT",
            SatVerdict::Unsat => "UNSAT",
            SatVerdict::UnknownNonempty => "UNKNOWN_NONEMPTY",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SatResult {
    pub verdict: SatVerdict,
    pub pairs: PairSet,
}

/// Satisfiability of `q` against a well-formed schema, decided through
/// [`infer`]: empty inference means unsatisfiable in every language, while
/// a non-empty one is conclusive only for RPQs.
pub fn sat(s: &GraphSchema, q: &Query) -> SatResult {
    let pairs = infer(s, q);
    let verdict = if pairs.is_empty() {
        SatVerdict::Unsat
    } else if q.language() == Language::Rpq {
        SatVerdict::Sat
    } else {
        SatVerdict::UnknownNonempty
    };
    SatResult { verdict, pairs }
}
