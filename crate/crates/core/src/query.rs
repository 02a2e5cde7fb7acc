//! Path queries over data graphs: regular path queries (RPQ), nested
//! regular expressions (NRE) and a navigational XPath-like fragment with
//! wildcard, counters and intersection (GXPath).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{DataGraph, GraphError, NodeId};
use crate::matrix::BitMatrix;
use crate::rex::Label;
use crate::syntax::{Cursor, SyntaxError, Tok};

/// Query languages, ordered by expressiveness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    Rpq,
    Nre,
    Gxpath,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Language::Rpq => "rpq",
            Language::Nre => "nre",
            Language::Gxpath => "gxpath",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown query language `{0}` (expected rpq, nre or gxpath)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rpq" => Ok(Language::Rpq),
            "nre" => Ok(Language::Nre),
            "gxpath" => Ok(Language::Gxpath),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Query {
    Eps,
    /// Any single forward edge.
    Any,
    Fwd(Label),
    Bwd(Label),
    Union(Box<Query>, Box<Query>),
    Concat(Box<Query>, Box<Query>),
    Star(Box<Query>),
    /// Between `m` and `n` repetitions, inclusive.
    Count(Box<Query>, u64, u64),
    Inter(Box<Query>, Box<Query>),
    /// Node test `[q]`: nodes where `q` has a match.
    Test(Box<Query>),
}

impl Query {
    pub fn fwd(label: Label) -> Self {
        Query::Fwd(label)
    }

    pub fn bwd(label: Label) -> Self {
        Query::Bwd(label)
    }

    pub fn union(l: Query, r: Query) -> Self {
        Query::Union(Box::new(l), Box::new(r))
    }

    pub fn concat(l: Query, r: Query) -> Self {
        Query::Concat(Box::new(l), Box::new(r))
    }

    pub fn star(q: Query) -> Self {
        Query::Star(Box::new(q))
    }

    /// # Panics
    /// If `n < m`.
    pub fn count(q: Query, m: u64, n: u64) -> Self {
        assert!(m <= n, "repetition range {m}..{n} is empty");
        Query::Count(Box::new(q), m, n)
    }

    pub fn inter(l: Query, r: Query) -> Self {
        Query::Inter(Box::new(l), Box::new(r))
    }

    pub fn test(q: Query) -> Self {
        Query::Test(Box::new(q))
    }

    /// The least language containing this query.
    pub fn language(&self) -> Language {
        match self {
            Query::Eps | Query::Fwd(_) => Language::Rpq,
            Query::Bwd(_) => Language::Nre,
            Query::Any => Language::Gxpath,
            Query::Union(l, r) | Query::Concat(l, r) => l.language().max(r.language()),
            Query::Star(q) => q.language(),
            Query::Test(q) => q.language().max(Language::Nre),
            Query::Count(..) | Query::Inter(..) => Language::Gxpath,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Query::Union(..) => 0,
            Query::Inter(..) => 1,
            Query::Concat(..) => 2,
            Query::Star(_) | Query::Count(..) => 3,
            Query::Eps | Query::Any | Query::Fwd(_) | Query::Bwd(_) | Query::Test(_) => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Query::Eps => f.write_str("eps")?,
            Query::Any => f.write_str("_")?,
            Query::Fwd(a) => write!(f, "{a}")?,
            Query::Bwd(a) => write!(f, "^{a}")?,
            Query::Union(l, r) => {
                l.fmt_prec(f, 0)?;
                f.write_str(" | ")?;
                r.fmt_prec(f, 1)?;
            }
            Query::Inter(l, r) => {
                l.fmt_prec(f, 1)?;
                f.write_str(" & ")?;
                r.fmt_prec(f, 2)?;
            }
            Query::Concat(l, r) => {
                l.fmt_prec(f, 2)?;
                f.write_str(" . ")?;
                r.fmt_prec(f, 3)?;
            }
            Query::Star(q) => {
                q.fmt_prec(f, 4)?;
                f.write_str("*")?;
            }
            Query::Count(q, m, n) => {
                q.fmt_prec(f, 4)?;
                write!(f, "{{{m},{n}}}")?;
            }
            Query::Test(q) => {
                f.write_str("[")?;
                q.fmt_prec(f, 0)?;
                f.write_str("]")?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{construct} at byte {offset} is not part of {lang}")]
    Language {
        construct: &'static str,
        offset: usize,
        lang: Language,
    },
    #[error("empty repetition range {{{m},{n}}} at byte {offset}")]
    EmptyRange { offset: usize, m: u64, n: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("path enumeration needs a regular path query, got {0} construct(s)")]
pub struct NotRegular(pub Language);

/// Parses `text`, rejecting constructs outside `lang`.
pub fn parse_query(text: &str, lang: Language) -> Result<Query, QueryError> {
    let mut p = Parser {
        cur: Cursor::new(text)?,
        lang,
    };
    let q = p.alt()?;
    p.cur.finish()?;
    Ok(q)
}

struct Parser {
    cur: Cursor,
    lang: Language,
}

impl Parser {
    fn allow(
        &self,
        needs: Language,
        construct: &'static str,
        offset: usize,
    ) -> Result<(), QueryError> {
        if needs <= self.lang {
            Ok(())
        } else {
            Err(QueryError::Language {
                construct,
                offset,
                lang: self.lang,
            })
        }
    }

    fn alt(&mut self) -> Result<Query, QueryError> {
        let mut q = self.inter()?;
        while self.cur.eat(&Tok::Pipe) {
            q = Query::union(q, self.inter()?);
        }
        Ok(q)
    }

    fn inter(&mut self) -> Result<Query, QueryError> {
        let mut q = self.cat()?;
        loop {
            let offset = self.cur.offset();
            if !self.cur.eat(&Tok::Amp) {
                return Ok(q);
            }
            self.allow(Language::Gxpath, "intersection `&`", offset)?;
            q = Query::inter(q, self.cat()?);
        }
    }

    fn cat(&mut self) -> Result<Query, QueryError> {
        let mut q = self.post()?;
        while self.cur.eat(&Tok::Dot) {
            q = Query::concat(q, self.post()?);
        }
        Ok(q)
    }

    fn post(&mut self) -> Result<Query, QueryError> {
        let q = self.atom()?;
        let offset = self.cur.offset();
        if self.cur.eat(&Tok::Star) {
            return Ok(Query::star(q));
        }
        if !self.cur.eat(&Tok::LBrace) {
            return Ok(q);
        }
        self.allow(Language::Gxpath, "counter `{m,n}`", offset)?;
        let m = self.nat()?;
        self.cur.expect(&Tok::Comma)?;
        let n = if self.cur.peek() == Some(&Tok::RBrace) {
            None
        } else {
            Some(self.nat()?)
        };
        self.cur.expect(&Tok::RBrace)?;
        Ok(match n {
            None => Query::concat(Query::count(q.clone(), m, m), Query::star(q)),
            Some(n) if n < m => return Err(QueryError::EmptyRange { offset, m, n }),
            Some(n) => Query::count(q, m, n),
        })
    }

    fn nat(&mut self) -> Result<u64, QueryError> {
        match self.cur.peek() {
            Some(Tok::Word(w)) => match w.parse() {
                Ok(n) => {
                    self.cur.bump();
                    Ok(n)
                }
                Err(_) => Err(self.cur.error("a natural number").into()),
            },
            _ => Err(self.cur.error("a natural number").into()),
        }
    }

    fn label(&mut self) -> Result<Label, QueryError> {
        let offset = self.cur.offset();
        match self.cur.peek() {
            Some(Tok::Word(w)) => {
                let label =
                    Label::new(w.as_str()).map_err(|_| SyntaxError::new(offset, "a label"))?;
                self.cur.bump();
                Ok(label)
            }
            _ => Err(self.cur.error("a label").into()),
        }
    }

    fn atom(&mut self) -> Result<Query, QueryError> {
        let offset = self.cur.offset();
        match self.cur.peek() {
            Some(Tok::Word(w)) if w == "eps" => {
                self.cur.bump();
                Ok(Query::Eps)
            }
            Some(Tok::Word(w)) if w == "_" => {
                self.allow(Language::Gxpath, "wildcard `_`", offset)?;
                self.cur.bump();
                Ok(Query::Any)
            }
            Some(Tok::Word(_)) => Ok(Query::Fwd(self.label()?)),
            Some(Tok::Caret) => {
                self.allow(Language::Nre, "backward label `^`", offset)?;
                self.cur.bump();
                Ok(Query::Bwd(self.label()?))
            }
            Some(Tok::LBracket) => {
                self.allow(Language::Nre, "nesting `[...]`", offset)?;
                self.cur.bump();
                let q = self.alt()?;
                self.cur.expect(&Tok::RBracket)?;
                Ok(Query::test(q))
            }
            Some(Tok::LParen) => {
                self.cur.bump();
                let q = self.alt()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(q)
            }
            _ => Err(self
                .cur
                .error("`eps`, `_`, a label, `^`, `[` or `(`")
                .into()),
        }
    }
}

impl FromStr for Query {
    type Err = QueryError;

    /// Parses with the most permissive language.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_query(s, Language::Gxpath)
    }
}

// --- evaluation ---------------------------------------------------------

pub type NodeRelation = BTreeSet<(NodeId, NodeId)>;

/// The pairs of nodes related by `q` in `g`.
pub fn eval(g: &DataGraph, q: &Query) -> NodeRelation {
    let ids = g.node_ids();
    eval_matrix(g, q)
        .pairs()
        .map(|(i, j)| (ids[i].clone(), ids[j].clone()))
        .collect()
}

pub(crate) fn eval_matrix(g: &DataGraph, q: &Query) -> BitMatrix {
    let n = g.node_count();
    let edges = |keep: &dyn Fn(&Label) -> bool| {
        BitMatrix::from_pairs(
            n,
            g.raw_edges()
                .iter()
                .filter(|(_, l, _)| keep(l))
                .map(|&(f, _, t)| (f, t)),
        )
    };
    match q {
        Query::Eps => BitMatrix::identity(n),
        Query::Any => edges(&|_| true),
        Query::Fwd(a) => edges(&|l| l == a),
        Query::Bwd(a) => edges(&|l| l == a).transpose(),
        Query::Union(l, r) => eval_matrix(g, l).union(&eval_matrix(g, r)),
        Query::Concat(l, r) => eval_matrix(g, l).compose(&eval_matrix(g, r)),
        Query::Inter(l, r) => eval_matrix(g, l).intersection(&eval_matrix(g, r)),
        Query::Test(q) => eval_matrix(g, q).domain_identity(),
        Query::Count(q, m, k) => eval_matrix(g, q).power_range(*m, *k),
        Query::Star(q) => star_fixpoint(&eval_matrix(g, q)),
    }
}

/// Reflexive-transitive closure by semi-naive iteration: each round only
/// extends the pairs found in the previous one.
fn star_fixpoint(step: &BitMatrix) -> BitMatrix {
    let mut closure = BitMatrix::identity(step.size());
    let mut delta = closure.clone();
    loop {
        let fresh = delta.compose(step).difference(&closure);
        if fresh.is_empty() {
            return closure;
        }
        closure = closure.union(&fresh);
        delta = fresh;
    }
}

// --- paths ----------------------------------------------------------------

pub type Path = Vec<Label>;

/// The label sequences of length at most `max_len` matched by an RPQ.
pub fn paths_of(q: &Query, max_len: usize) -> Result<BTreeSet<Path>, NotRegular> {
    if q.language() != Language::Rpq {
        return Err(NotRegular(q.language()));
    }
    Ok(paths(q, max_len))
}

fn paths(q: &Query, max_len: usize) -> BTreeSet<Path> {
    match q {
        Query::Eps => BTreeSet::from([Vec::new()]),
        Query::Fwd(a) if max_len >= 1 => BTreeSet::from([vec![a.clone()]]),
        Query::Fwd(_) => BTreeSet::new(),
        Query::Union(l, r) => {
            let mut out = paths(l, max_len);
            out.extend(paths(r, max_len));
            out
        }
        Query::Concat(l, r) => concat_paths(&paths(l, max_len), &paths(r, max_len), max_len),
        Query::Star(inner) => {
            let step = paths(inner, max_len);
            let mut all = BTreeSet::from([Vec::new()]);
            let mut frontier = all.clone();
            while !frontier.is_empty() {
                frontier = concat_paths(&frontier, &step, max_len)
                    .into_iter()
                    .filter(|p| !all.contains(p))
                    .collect();
                all.extend(frontier.iter().cloned());
            }
            all
        }
        Query::Any | Query::Bwd(_) | Query::Count(..) | Query::Inter(..) | Query::Test(_) => {
            unreachable!("checked by paths_of")
        }
    }
}

fn concat_paths(left: &BTreeSet<Path>, right: &BTreeSet<Path>, max_len: usize) -> BTreeSet<Path> {
    let mut out = BTreeSet::new();
    for p in left {
        for s in right {
            if p.len() + s.len() <= max_len {
                out.insert(p.iter().chain(s).cloned().collect());
            }
        }
    }
    out
}

/// Whether following the labels of `p` from `u` can end in `v`.
pub fn connected_in_graph(
    g: &DataGraph,
    u: &str,
    v: &str,
    p: &[Label],
) -> Result<bool, GraphError> {
    let find = |id: &str| {
        g.index_of(id)
            .ok_or_else(|| GraphError::UnknownNode(id.to_string()))
    };
    let (start, goal) = (find(u)?, find(v)?);
    let mut frontier = BTreeSet::from([start]);
    for a in p {
        frontier = g
            .raw_edges()
            .iter()
            .filter(|(f, l, _)| l == a && frontier.contains(f))
            .map(|&(_, _, t)| t)
            .collect();
    }
    Ok(frontier.contains(&goal))
}
