//! Regular expressions over edge labels, read with unordered concatenation.
//!
//! A [`Regex`] describes a set of label *bags* (multisets): `a . b` and
//! `b . a` denote the same language. Most of the toolkit only accepts
//! conflict-free expressions, where every label occurs at most once and
//! repetition is applied to single labels only. For those, membership is
//! decided compositionally by [`bag_matches`] and the expression can be put
//! in disjunctive normal form by [`norm`].
//!
//! Surface syntax: `|` is union, `.` is concatenation, postfix `*`, `+` and
//! `?`, `eps` for the empty bag and parentheses for grouping.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::syntax::{is_word_byte, Cursor, SyntaxError, Tok};

/// Default bag-size bound for [`bag_matches_oracle`].
pub const DEFAULT_ORACLE_BOUND: usize = 8;

/// An edge label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid label `{0}`: labels are non-empty [A-Za-z0-9_] words other than `eps` and `_`")]
pub struct InvalidLabel(pub String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self, InvalidLabel> {
        let name = name.into();
        let ok = !name.is_empty() && name.bytes().all(is_word_byte) && name != "eps" && name != "_";
        if ok {
            Ok(Label(name))
        } else {
            Err(InvalidLabel(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Label {
    type Err = InvalidLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(s)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    Epsilon,
    Sym(Label),
    Union(Box<Regex>, Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
    /// One or more repetitions. Kept apart from `Star` so that `a+` stays
    /// conflict-free.
    Plus(Box<Regex>),
}

impl Regex {
    pub fn sym(label: Label) -> Self {
        Regex::Sym(label)
    }

    pub fn union(l: Regex, r: Regex) -> Self {
        Regex::Union(Box::new(l), Box::new(r))
    }

    pub fn concat(l: Regex, r: Regex) -> Self {
        Regex::Concat(Box::new(l), Box::new(r))
    }

    pub fn star(inner: Regex) -> Self {
        Regex::Star(Box::new(inner))
    }

    pub fn plus(inner: Regex) -> Self {
        Regex::Plus(Box::new(inner))
    }

    /// Labels occurring anywhere in the expression.
    pub fn sym_set(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.collect_syms(&mut out);
        out
    }

    fn collect_syms(&self, out: &mut BTreeSet<Label>) {
        match self {
            Regex::Epsilon => {}
            Regex::Sym(a) => {
                out.insert(a.clone());
            }
            Regex::Union(l, r) | Regex::Concat(l, r) => {
                l.collect_syms(out);
                r.collect_syms(out);
            }
            Regex::Star(t) | Regex::Plus(t) => t.collect_syms(out),
        }
    }

    pub fn is_conflict_free(&self) -> bool {
        self.check_conflict_free().is_ok()
    }

    /// Like [`Regex::is_conflict_free`], but names the first violation found.
    pub fn check_conflict_free(&self) -> Result<(), CfViolation> {
        self.cf_syms().map(|_| ())
    }

    fn cf_syms(&self) -> Result<BTreeSet<Label>, CfViolation> {
        match self {
            Regex::Epsilon => Ok(BTreeSet::new()),
            Regex::Sym(a) => Ok(BTreeSet::from([a.clone()])),
            Regex::Union(l, r) | Regex::Concat(l, r) => {
                let mut ls = l.cf_syms()?;
                let rs = r.cf_syms()?;
                if let Some(dup) = ls.intersection(&rs).next() {
                    return Err(CfViolation::RepeatedLabel(dup.clone()));
                }
                ls.extend(rs);
                Ok(ls)
            }
            Regex::Star(t) | Regex::Plus(t) => match t.as_ref() {
                Regex::Sym(a) => Ok(BTreeSet::from([a.clone()])),
                _ => Err(CfViolation::CompositeRepetition(self.to_string())),
            },
        }
    }

    /// True when the expression contains no `Union` node.
    pub fn is_union_free(&self) -> bool {
        match self {
            Regex::Epsilon | Regex::Sym(_) => true,
            Regex::Union(..) => false,
            Regex::Concat(l, r) => l.is_union_free() && r.is_union_free(),
            Regex::Star(t) | Regex::Plus(t) => t.is_union_free(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Regex::Union(..) => 0,
            Regex::Concat(..) => 1,
            Regex::Star(_) | Regex::Plus(_) => 2,
            Regex::Epsilon | Regex::Sym(_) => 3,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Regex::Epsilon => f.write_str("eps")?,
            Regex::Sym(a) => write!(f, "{a}")?,
            Regex::Union(l, r) => {
                l.fmt_prec(f, 0)?;
                f.write_str(" | ")?;
                r.fmt_prec(f, 1)?;
            }
            Regex::Concat(l, r) => {
                l.fmt_prec(f, 1)?;
                f.write_str(" . ")?;
                r.fmt_prec(f, 2)?;
            }
            Regex::Star(t) => {
                t.fmt_prec(f, 3)?;
                f.write_str("*")?;
            }
            Regex::Plus(t) => {
                t.fmt_prec(f, 3)?;
                f.write_str("+")?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl FromStr for Regex {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_regex(s)
    }
}

/// Why an expression is not conflict-free.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfViolation {
    #[error("label `{0}` occurs more than once")]
    RepeatedLabel(Label),
    #[error("repetition over a non-label subterm in `{0}`")]
    CompositeRepetition(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{regex}` is not conflict-free: {violation}")]
pub struct NotConflictFree {
    pub regex: String,
    pub violation: CfViolation,
}

fn require_cf(t: &Regex) -> Result<(), NotConflictFree> {
    t.check_conflict_free()
        .map_err(|violation| NotConflictFree {
            regex: t.to_string(),
            violation,
        })
}

pub fn parse_regex(text: &str) -> Result<Regex, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let t = parse_alt(&mut cur)?;
    cur.finish()?;
    Ok(t)
}

fn parse_alt(cur: &mut Cursor) -> Result<Regex, SyntaxError> {
    let mut t = parse_cat(cur)?;
    while cur.eat(&Tok::Pipe) {
        t = Regex::union(t, parse_cat(cur)?);
    }
    Ok(t)
}

fn parse_cat(cur: &mut Cursor) -> Result<Regex, SyntaxError> {
    let mut t = parse_post(cur)?;
    while cur.eat(&Tok::Dot) {
        t = Regex::concat(t, parse_post(cur)?);
    }
    Ok(t)
}

fn parse_post(cur: &mut Cursor) -> Result<Regex, SyntaxError> {
    let t = parse_atom(cur)?;
    Ok(match cur.peek() {
        Some(Tok::Star) => {
            cur.bump();
            Regex::star(t)
        }
        Some(Tok::Plus) => {
            cur.bump();
            Regex::plus(t)
        }
        Some(Tok::Question) => {
            cur.bump();
            Regex::union(t, Regex::Epsilon)
        }
        _ => t,
    })
}

fn parse_atom(cur: &mut Cursor) -> Result<Regex, SyntaxError> {
    let offset = cur.offset();
    match cur.peek().cloned() {
        Some(Tok::LParen) => {
            cur.bump();
            let t = parse_alt(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(t)
        }
        Some(Tok::Word(w)) if w == "eps" => {
            cur.bump();
            Ok(Regex::Epsilon)
        }
        Some(Tok::Word(w)) => {
            let label =
                Label::new(w).map_err(|_| SyntaxError::new(offset, "a label other than `_`"))?;
            cur.bump();
            Ok(Regex::Sym(label))
        }
        _ => Err(cur.error("`eps`, a label or `(`")),
    }
}

/// A multiset of labels, e.g. the labels on a node's incoming edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct LabelBag {
    counts: BTreeMap<Label, usize>,
}

impl LabelBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, label: Label, n: usize) {
        if n > 0 {
            *self.counts.entry(label).or_insert(0) += n;
        }
    }

    pub fn insert(&mut self, label: Label) {
        self.add(label, 1);
    }

    pub fn count(&self, label: &Label) -> usize {
        self.counts.get(label).copied().unwrap_or(0)
    }

    /// Total number of labels, counting multiplicity.
    pub fn size(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, usize)> {
        self.counts.iter().map(|(l, n)| (l, *n))
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.counts.keys()
    }

    /// Bag union: counts add up.
    pub fn union(&self, other: &LabelBag) -> LabelBag {
        let mut out = self.clone();
        for (l, n) in other.iter() {
            out.add(l.clone(), n);
        }
        out
    }

    /// Keeps only the labels in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Label>) -> LabelBag {
        LabelBag {
            counts: self
                .counts
                .iter()
                .filter(|(l, _)| keep.contains(*l))
                .map(|(l, n)| (l.clone(), *n))
                .collect(),
        }
    }

    /// `self - other`, or `None` when `other` is not a sub-bag of `self`.
    pub fn checked_sub(&self, other: &LabelBag) -> Option<LabelBag> {
        let mut out = self.clone();
        for (l, n) in other.iter() {
            let have = out.counts.get_mut(l)?;
            if *have < n {
                return None;
            }
            *have -= n;
            if *have == 0 {
                out.counts.remove(l);
            }
        }
        Some(out)
    }

    /// Every sub-bag, including the empty bag and `self`.
    pub fn sub_bags(&self) -> Vec<LabelBag> {
        let mut out = vec![LabelBag::new()];
        for (l, n) in self.iter() {
            let mut next = Vec::with_capacity(out.len() * (n + 1));
            for b in &out {
                for k in 0..=n {
                    let mut nb = b.clone();
                    nb.add(l.clone(), k);
                    next.push(nb);
                }
            }
            out = next;
        }
        out
    }
}

impl FromIterator<Label> for LabelBag {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        let mut bag = LabelBag::new();
        for l in iter {
            bag.insert(l);
        }
        bag
    }
}

impl FromIterator<(Label, usize)> for LabelBag {
    fn from_iter<I: IntoIterator<Item = (Label, usize)>>(iter: I) -> Self {
        let mut bag = LabelBag::new();
        for (l, n) in iter {
            bag.add(l, n);
        }
        bag
    }
}

impl fmt::Display for LabelBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, n)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}:{n}")?;
        }
        f.write_str("}")
    }
}

/// Membership of `bag` in the language of a conflict-free `t`.
pub fn bag_matches(bag: &LabelBag, t: &Regex) -> Result<bool, NotConflictFree> {
    require_cf(t)?;
    Ok(matches_cf(bag, t))
}

fn matches_cf(bag: &LabelBag, t: &Regex) -> bool {
    match t {
        Regex::Epsilon => bag.is_empty(),
        Regex::Sym(a) => bag.size() == 1 && bag.count(a) == 1,
        Regex::Union(l, r) => matches_cf(bag, l) || matches_cf(bag, r),
        Regex::Concat(l, r) => {
            let ls = l.sym_set();
            let rs = r.sym_set();
            if bag.labels().any(|a| !ls.contains(a) && !rs.contains(a)) {
                return false;
            }
            matches_cf(&bag.restrict(&ls), l) && matches_cf(&bag.restrict(&rs), r)
        }
        Regex::Star(inner) | Regex::Plus(inner) => {
            let Regex::Sym(a) = inner.as_ref() else {
                unreachable!("conflict-free repetition is over a label")
            };
            let only_a = bag.labels().all(|l| l == a);
            only_a && (matches!(t, Regex::Star(_)) || bag.count(a) >= 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bag of size {size} exceeds the oracle bound {bound}")]
pub struct BoundExceeded {
    pub size: usize,
    pub bound: usize,
}

/// Membership for arbitrary expressions by exhaustive bag splitting.
///
/// Exponential in the bag size; only meant for small bags (at most `bound`
/// labels) and as a reference for [`bag_matches`].
pub fn bag_matches_oracle(bag: &LabelBag, t: &Regex, bound: usize) -> Result<bool, BoundExceeded> {
    let size = bag.size();
    if size > bound {
        return Err(BoundExceeded { size, bound });
    }
    let mut oracle = Oracle::default();
    Ok(oracle.matches(bag, t))
}

#[derive(Default)]
struct Oracle {
    memo: HashMap<(usize, bool, LabelBag), bool>,
}

impl Oracle {
    fn matches(&mut self, bag: &LabelBag, t: &Regex) -> bool {
        let key = (t as *const Regex as usize, false, bag.clone());
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let result = match t {
            Regex::Epsilon => bag.is_empty(),
            Regex::Sym(a) => bag.size() == 1 && bag.count(a) == 1,
            Regex::Union(l, r) => self.matches(bag, l) || self.matches(bag, r),
            Regex::Concat(l, r) => {
                self.split_any(bag, |o, b1, b2| o.matches(b1, l) && o.matches(b2, r))
            }
            Regex::Star(inner) => self.star(bag, inner),
            // T+ = T* . T
            Regex::Plus(inner) => {
                self.split_any(bag, |o, b1, b2| o.matches(b1, inner) && o.star(b2, inner))
            }
        };
        self.memo.insert(key, result);
        result
    }

    fn star(&mut self, bag: &LabelBag, inner: &Regex) -> bool {
        if bag.is_empty() {
            return true;
        }
        let key = (inner as *const Regex as usize, true, bag.clone());
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        // peel off one non-empty iteration; the rest is strictly smaller
        let result = self.split_any(bag, |o, b1, b2| {
            !b1.is_empty() && o.matches(b1, inner) && o.star(b2, inner)
        });
        self.memo.insert(key, result);
        result
    }

    fn split_any(
        &mut self,
        bag: &LabelBag,
        mut f: impl FnMut(&mut Self, &LabelBag, &LabelBag) -> bool,
    ) -> bool {
        for b1 in bag.sub_bags() {
            let b2 = bag.checked_sub(&b1).expect("sub-bag");
            if f(self, &b1, &b2) {
                return true;
            }
        }
        false
    }
}

/// Multiplicity of a label inside a union-free clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Atom {
    One,
    Plus,
    Star,
}

impl Atom {
    /// Admitted counts as `(min, max)`, `None` meaning unbounded.
    pub fn bounds(self) -> (usize, Option<usize>) {
        match self {
            Atom::One => (1, Some(1)),
            Atom::Plus => (1, None),
            Atom::Star => (0, None),
        }
    }

    pub fn admits(self, count: usize) -> bool {
        let (lo, hi) = self.bounds();
        count >= lo && hi.is_none_or(|h| count <= h)
    }
}

/// A union-free conflict-free expression, as a map from label to atom.
/// The empty clause is `eps`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(BTreeMap<Label, Atom>);

impl Clause {
    pub fn epsilon() -> Self {
        Clause::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = (Label, Atom)>) -> Self {
        Clause(atoms.into_iter().collect())
    }

    pub fn atom(&self, label: &Label) -> Option<Atom> {
        self.0.get(label).copied()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Label, Atom)> {
        self.0.iter().map(|(l, a)| (l, *a))
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.0.keys()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.0.contains_key(label)
    }

    pub fn is_epsilon(&self) -> bool {
        self.0.is_empty()
    }

    pub fn matches(&self, bag: &LabelBag) -> bool {
        bag.labels().all(|l| self.contains(l))
            && self.atoms().all(|(l, atom)| atom.admits(bag.count(l)))
    }

    /// A bag in both languages, if the two clauses intersect.
    pub fn common_bag(&self, other: &Clause) -> Option<LabelBag> {
        let labels: BTreeSet<&Label> = self.labels().chain(other.labels()).collect();
        let mut bag = LabelBag::new();
        for l in labels {
            let (lo1, hi1) = self.atom(l).map_or((0, Some(0)), Atom::bounds);
            let (lo2, hi2) = other.atom(l).map_or((0, Some(0)), Atom::bounds);
            let lo = lo1.max(lo2);
            let hi = match (hi1, hi2) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            if hi.is_some_and(|h| lo > h) {
                return None;
            }
            bag.add(l.clone(), lo);
        }
        Some(bag)
    }

    fn merge(&self, other: &Clause) -> Clause {
        let mut out = self.clone();
        for (l, a) in other.atoms() {
            let prev = out.0.insert(l.clone(), a);
            debug_assert!(
                prev.is_none(),
                "clauses of a conflict-free concat share a label"
            );
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, (l, a)) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(" . ")?;
            }
            match a {
                Atom::One => write!(f, "{l}")?,
                Atom::Plus => write!(f, "{l}+")?,
                Atom::Star => write!(f, "{l}*")?,
            }
        }
        Ok(())
    }
}

/// A union of clauses, sorted and without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DnfRegex {
    clauses: Vec<Clause>,
}

impl DnfRegex {
    pub fn new(mut clauses: Vec<Clause>) -> Self {
        assert!(!clauses.is_empty(), "a DNF has at least one clause");
        clauses.sort();
        clauses.dedup();
        DnfRegex { clauses }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn matches(&self, bag: &LabelBag) -> bool {
        self.clauses.iter().any(|c| c.matches(bag))
    }

    pub fn intersects(&self, other: &DnfRegex) -> Option<LabelBag> {
        self.clauses
            .iter()
            .flat_map(|c| other.clauses.iter().map(move |d| c.common_bag(d)))
            .flatten()
            .next()
    }
}

impl fmt::Display for DnfRegex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Disjunctive normal form of a conflict-free expression.
pub fn norm(t: &Regex) -> Result<DnfRegex, NotConflictFree> {
    require_cf(t)?;
    Ok(DnfRegex::new(norm_clauses(t)))
}

fn norm_clauses(t: &Regex) -> Vec<Clause> {
    match t {
        Regex::Epsilon => vec![Clause::epsilon()],
        Regex::Sym(a) => vec![Clause::from_atoms([(a.clone(), Atom::One)])],
        Regex::Union(l, r) => {
            let mut out = norm_clauses(l);
            out.extend(norm_clauses(r));
            out
        }
        Regex::Concat(l, r) => {
            let ls = norm_clauses(l);
            let rs = norm_clauses(r);
            ls.iter()
                .flat_map(|a| rs.iter().map(move |b| a.merge(b)))
                .collect()
        }
        Regex::Star(inner) | Regex::Plus(inner) => {
            let Regex::Sym(a) = inner.as_ref() else {
                unreachable!("conflict-free repetition is over a label")
            };
            let atom = if matches!(t, Regex::Star(_)) {
                Atom::Star
            } else {
                Atom::Plus
            };
            vec![Clause::from_atoms([(a.clone(), atom)])]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn re(s: &str) -> Regex {
        parse_regex(s).unwrap()
    }

    fn bag(items: &[(&str, usize)]) -> LabelBag {
        items.iter().map(|(n, c)| (l(n), *c)).collect()
    }

    #[test]
    fn parses_worked_examples() {
        assert_eq!(re("eps"), Regex::Epsilon);
        assert_eq!(
            re("a* . b | c"),
            Regex::union(
                Regex::concat(Regex::star(Regex::sym(l("a"))), Regex::sym(l("b"))),
                Regex::sym(l("c"))
            )
        );
        assert_eq!(
            re("a . (b | c)"),
            Regex::concat(
                Regex::sym(l("a")),
                Regex::union(Regex::sym(l("b")), Regex::sym(l("c")))
            )
        );
    }

    #[test]
    fn question_mark_desugars() {
        assert_eq!(re("a?"), Regex::union(Regex::sym(l("a")), Regex::Epsilon));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_regex("a . ").unwrap_err();
        assert_eq!(err.offset, 4);
        let err = parse_regex("a | (b").unwrap_err();
        assert_eq!(err.offset, 6);
        assert!(err.expected.contains("`)`"));
        assert_eq!(parse_regex("a $ b").unwrap_err().offset, 2);
        assert_eq!(parse_regex("a b").unwrap_err().offset, 2);
        assert!(parse_regex("_").is_err());
        assert!(parse_regex("").is_err());
    }

    #[test]
    fn labels_reject_keywords() {
        assert!(Label::new("eps").is_err());
        assert!(Label::new("_").is_err());
        assert!(Label::new("").is_err());
        assert!(Label::new("a-b").is_err());
        assert!(Label::new("_x9").is_ok());
    }

    #[test]
    fn sym_examples() {
        assert!(Regex::Epsilon.sym_set().is_empty());
        let abc: BTreeSet<Label> = ["a", "b", "c"].into_iter().map(l).collect();
        assert_eq!(re("a . (b | c)").sym_set(), abc);
        assert_eq!(re("a* . b | c").sym_set(), abc);
    }

    #[test]
    fn conflict_freedom() {
        assert!(re("a* . b | c").is_conflict_free());
        assert_eq!(
            re("(a . b)* . c").check_conflict_free(),
            Err(CfViolation::CompositeRepetition("(a . b)*".into()))
        );
        assert_eq!(
            re("a . b . c . c").check_conflict_free(),
            Err(CfViolation::RepeatedLabel(l("c")))
        );
        assert!(!re("a | a").is_conflict_free());
        assert!(re("eps | eps").is_conflict_free());
        assert!(re("a+").is_conflict_free());
    }

    #[test]
    fn bag_matching_examples() {
        assert!(bag_matches(&bag(&[("e", 1), ("h", 2)]), &re("e . h*")).unwrap());
        assert!(bag_matches(&LabelBag::new(), &re("eps")).unwrap());
        assert!(!bag_matches(&bag(&[("a", 2), ("b", 1)]), &re("a . b")).unwrap());
        assert!(!bag_matches(&bag(&[("a", 1), ("z", 1)]), &re("a . b*")).unwrap());
        assert!(bag_matches(
            &bag(&[("b", 1), ("c", 1), ("a", 1)]),
            &re("a . b . (c | d)")
        )
        .unwrap());
        assert!(!bag_matches(&LabelBag::new(), &re("a+")).unwrap());
        assert!(bag_matches(&bag(&[("a", 3)]), &re("a+")).unwrap());
        assert!(bag_matches(&bag(&[("a", 1)]), &re("(a . b . c . c)")).is_err());
    }

    #[test]
    fn oracle_examples() {
        let t = re("(a . b)* . c");
        let b = DEFAULT_ORACLE_BOUND;
        assert!(!bag_matches_oracle(&bag(&[("a", 1), ("b", 1)]), &t, b).unwrap());
        assert!(bag_matches_oracle(&bag(&[("a", 1), ("b", 1), ("c", 1)]), &t, b).unwrap());
        assert!(bag_matches_oracle(&bag(&[("a", 2), ("b", 2), ("c", 1)]), &t, b).unwrap());
        assert!(!bag_matches_oracle(&bag(&[("a", 2), ("b", 1), ("c", 1)]), &t, b).unwrap());
        assert!(bag_matches_oracle(&LabelBag::new(), &re("a*"), b).unwrap());
        assert!(bag_matches_oracle(&bag(&[("c", 2)]), &re("c . c"), b).unwrap());
        assert!(bag_matches_oracle(&bag(&[("c", 4)]), &re("(c . c)+"), b).unwrap());
        assert!(!bag_matches_oracle(&bag(&[("c", 3)]), &re("(c . c)+"), b).unwrap());
        assert_eq!(
            bag_matches_oracle(&bag(&[("a", 9)]), &re("a*"), b),
            Err(BoundExceeded { size: 9, bound: 8 })
        );
    }

    #[test]
    fn norm_examples() {
        let ab = Clause::from_atoms([(l("a"), Atom::One), (l("b"), Atom::One)]);
        let ac = Clause::from_atoms([(l("a"), Atom::One), (l("c"), Atom::One)]);
        assert_eq!(norm(&re("a . (b | c)")).unwrap().clauses(), &[ab, ac]);
        assert_eq!(
            norm(&re("a*")).unwrap().clauses(),
            &[Clause::from_atoms([(l("a"), Atom::Star)])]
        );
        assert_eq!(
            norm(&re("eps | a")).unwrap().clauses(),
            &[Clause::epsilon(), Clause::from_atoms([(l("a"), Atom::One)])]
        );
        assert_eq!(norm(&re("eps | eps")).unwrap().clauses().len(), 1);
        assert!(norm(&re("(a . b)*")).is_err());
        assert_eq!(
            norm(&re("(journal | partOf) . creator+"))
                .unwrap()
                .to_string(),
            "creator+ . journal | creator+ . partOf"
        );
    }

    #[test]
    fn clause_intersection() {
        let a_star = Clause::from_atoms([(l("a"), Atom::Star)]);
        let b_star = Clause::from_atoms([(l("b"), Atom::Star)]);
        assert_eq!(a_star.common_bag(&b_star), Some(LabelBag::new()));
        let a_one = Clause::from_atoms([(l("a"), Atom::One)]);
        let a_plus = Clause::from_atoms([(l("a"), Atom::Plus)]);
        assert_eq!(a_one.common_bag(&a_plus), Some(bag(&[("a", 1)])));
        assert_eq!(a_one.common_bag(&b_star), None);
        assert_eq!(a_plus.common_bag(&Clause::epsilon()), None);
    }

    // --- property tests -------------------------------------------------

    const ALPHABET: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

    #[derive(Debug, Clone)]
    enum Shape {
        Eps,
        Leaf(u8),
        Union(Box<Shape>, Box<Shape>),
        Concat(Box<Shape>, Box<Shape>),
    }

    fn shape() -> impl Strategy<Value = Shape> {
        let leaf = prop_oneof![Just(Shape::Eps), (0u8..3).prop_map(Shape::Leaf)];
        leaf.prop_recursive(3, 6, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Shape::Union(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Shape::Concat(Box::new(a), Box::new(b))),
            ]
        })
    }

    fn realize(s: &Shape, labels: &[usize], next: &mut usize) -> Regex {
        match s {
            Shape::Eps => Regex::Epsilon,
            Shape::Leaf(kind) => {
                let a = Regex::sym(l(ALPHABET[labels[*next % labels.len()]]));
                *next += 1;
                match kind {
                    0 => a,
                    1 => Regex::star(a),
                    _ => Regex::plus(a),
                }
            }
            Shape::Union(x, y) => {
                let x = realize(x, labels, next);
                Regex::union(x, realize(y, labels, next))
            }
            Shape::Concat(x, y) => {
                let x = realize(x, labels, next);
                Regex::concat(x, realize(y, labels, next))
            }
        }
    }

    fn cf_regex() -> impl Strategy<Value = Regex> {
        (
            shape(),
            Just((0..ALPHABET.len()).collect::<Vec<_>>()).prop_shuffle(),
        )
            .prop_filter_map("conflict-free", |(s, perm)| {
                let t = realize(&s, &perm, &mut 0);
                t.is_conflict_free().then_some(t)
            })
    }

    fn any_regex() -> impl Strategy<Value = Regex> {
        let leaf = prop_oneof![
            Just(Regex::Epsilon),
            (0usize..3).prop_map(|i| Regex::sym(l(ALPHABET[i]))),
        ];
        leaf.prop_recursive(4, 10, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Regex::union(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Regex::concat(a, b)),
                inner.clone().prop_map(Regex::star),
                inner.prop_map(Regex::plus),
            ]
        })
    }

    fn small_bag(max: usize) -> impl Strategy<Value = LabelBag> {
        // the last label is fresh for most generated expressions
        proptest::collection::vec((0usize..4, 1usize..3), 0..4).prop_filter_map(
            "size bound",
            move |items| {
                let b: LabelBag = items
                    .into_iter()
                    .map(|(i, n)| (l(ALPHABET[i]), n))
                    .collect();
                (b.size() <= max).then_some(b)
            },
        )
    }

    proptest! {
        #[test]
        fn fast_path_agrees_with_oracle(t in cf_regex(), b in small_bag(6)) {
            prop_assert_eq!(
                bag_matches(&b, &t).unwrap(),
                bag_matches_oracle(&b, &t, 6).unwrap()
            );
        }

        #[test]
        fn norm_preserves_language(t in cf_regex(), b in small_bag(6)) {
            prop_assert_eq!(norm(&t).unwrap().matches(&b), bag_matches(&b, &t).unwrap());
        }

        #[test]
        fn concat_commutes(x in cf_regex(), y in cf_regex(), b in small_bag(6)) {
            let xy = Regex::concat(x.clone(), y.clone());
            prop_assume!(xy.is_conflict_free());
            let yx = Regex::concat(y, x);
            prop_assert_eq!(bag_matches(&b, &xy).unwrap(), bag_matches(&b, &yx).unwrap());
        }

        #[test]
        fn print_parse_round_trip(t in any_regex()) {
            prop_assert_eq!(parse_regex(&t.to_string()).unwrap(), t);
        }

        #[test]
        fn oracle_agrees_on_star_unfolding(t in any_regex(), b in small_bag(4)) {
            // T* accepts exactly eps and T . T*
            let star = Regex::star(t.clone());
            let unfolded = Regex::union(Regex::Epsilon, Regex::concat(t, star.clone()));
            prop_assert_eq!(
                bag_matches_oracle(&b, &star, 4).unwrap(),
                bag_matches_oracle(&b, &unfolded, 4).unwrap()
            );
        }
    }
}
