//! Random generators and brute-force oracles shared by the integration
//! tests. Everything is seeded so failures reproduce.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use gschema::graph::{DataGraph, NodeId, Typing};
use gschema::query::{Language, Query};
use gschema::rex::{Atom, Label, LabelBag, Regex};
use gschema::schema::{check_schema, dnorm, GraphSchema, SchemaElement};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LABELS: [&str; 4] = ["a", "b", "c", "d"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn l(s: &str) -> Label {
    Label::new(s).unwrap()
}

pub fn labels(n: usize) -> Vec<Label> {
    LABELS[..n].iter().map(|s| l(s)).collect()
}

fn random_atom(rng: &mut impl Rng) -> Atom {
    match rng.gen_range(0..4) {
        0 => Atom::One,
        1 => Atom::Plus,
        _ => Atom::Star,
    }
}

fn atom_regex(a: &Label, atom: Atom) -> Regex {
    let sym = Regex::sym(a.clone());
    match atom {
        Atom::One => sym,
        Atom::Plus => Regex::plus(sym),
        Atom::Star => Regex::star(sym),
    }
}

/// A conflict-free regex in disjunctive form with at most two clauses over
/// disjoint subsets of `alphabet`.
fn random_side(rng: &mut impl Rng, alphabet: &[Label]) -> Regex {
    let mut clauses: Vec<Vec<Label>> = vec![Vec::new(), Vec::new()];
    let two = rng.gen_bool(0.3);
    for a in alphabet {
        if rng.gen_bool(0.45) {
            let k = if two { rng.gen_range(0..2) } else { 0 };
            clauses[k].push(a.clone());
        }
    }
    let first = random_clause(rng, &clauses[0]);
    if two {
        Regex::union(first, random_clause(rng, &clauses[1]))
    } else {
        first
    }
}

fn random_clause(rng: &mut impl Rng, ls: &[Label]) -> Regex {
    ls.iter()
        .map(|a| atom_regex(a, random_atom(rng)))
        .reduce(Regex::concat)
        .unwrap_or(Regex::Epsilon)
}

/// A random schema with at most 5 elements over at most 4 labels that is
/// conflict-free, has no dangling labels and is well-formed.
pub fn random_wf_schema(rng: &mut impl Rng) -> GraphSchema {
    loop {
        let alphabet = labels(rng.gen_range(1..=4));
        let n = rng.gen_range(1..=5);
        let elements: Vec<SchemaElement> = (0..n)
            .map(|k| {
                SchemaElement::new(
                    format!("e{}", k + 1),
                    random_side(rng, &alphabet),
                    random_side(rng, &alphabet),
                )
            })
            .collect();
        let s = GraphSchema::new(elements).expect("generated regexes are conflict-free");
        if check_schema(&s).accepted {
            return s;
        }
    }
}

/// A random conflict-free regex over `alphabet`, labels used at most once.
pub fn random_cf_regex(rng: &mut impl Rng, alphabet: &[Label], depth: usize) -> Regex {
    if alphabet.is_empty() {
        return Regex::Epsilon;
    }
    if depth == 0 || alphabet.len() == 1 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => Regex::Epsilon,
            _ => atom_regex(&alphabet[0], random_atom(rng)),
        };
    }
    let cut = rng.gen_range(1..alphabet.len());
    let (left, right) = alphabet.split_at(cut);
    let l = random_cf_regex(rng, left, depth - 1);
    let r = random_cf_regex(rng, right, depth - 1);
    if rng.gen_bool(0.5) {
        Regex::union(l, r)
    } else {
        Regex::concat(l, r)
    }
}

pub fn random_bag(rng: &mut impl Rng, alphabet: &[Label], max: usize) -> LabelBag {
    let size = rng.gen_range(0..=max);
    (0..size)
        .map(|_| alphabet.choose(rng).unwrap().clone())
        .collect()
}

/// Every bag over `alphabet` with at most `max` labels.
pub fn all_bags(alphabet: &[Label], max: usize) -> Vec<LabelBag> {
    let mut out = vec![LabelBag::new()];
    for a in alphabet {
        let mut next = Vec::new();
        for bag in &out {
            for k in 0..=max - bag.size() {
                let mut b = bag.clone();
                b.add(a.clone(), k);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn degree(rng: &mut impl Rng, atom: Atom) -> usize {
    match atom {
        Atom::One => 1,
        Atom::Plus => rng.gen_range(1..=3),
        Atom::Star => rng.gen_range(0..=3),
    }
}

/// A random graph conforming to a well-formed schema, with up to two nodes
/// per normalized entry, together with the origin each node was drawn for.
/// Gives up after a few attempts when degrees cannot be balanced.
pub fn random_conforming_graph(s: &GraphSchema, rng: &mut impl Rng) -> Option<(DataGraph, Typing)> {
    let d = dnorm(s);
    'attempt: for _ in 0..20 {
        let mut nodes: Vec<usize> = Vec::new();
        for k in 0..d.entries().len() {
            for _ in 0..rng.gen_range(0..=2) {
                nodes.push(k);
            }
        }
        if nodes.is_empty() && !d.entries().is_empty() {
            nodes.push(rng.gen_range(0..d.entries().len()));
        }
        let mut b = DataGraph::builder();
        let mut typing = Typing::default();
        for (i, &k) in nodes.iter().enumerate() {
            b.add_node(format!("v{i}"), d.entries()[k].name.clone());
            typing.assignment.insert(
                NodeId::new(format!("v{i}")).unwrap(),
                d.entries()[k].origin_name.clone(),
            );
        }
        let alphabet = s.alphabet();
        for a in &alphabet {
            let users = |out: bool| -> Vec<(usize, Atom)> {
                nodes
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &k)| {
                        let e = &d.entries()[k];
                        let c = if out { &e.out_clause } else { &e.in_clause };
                        c.atom(a).map(|atom| (i, atom))
                    })
                    .collect()
            };
            let (prod, cons) = (users(true), users(false));
            let mut pd: Vec<usize> = prod.iter().map(|&(_, at)| degree(rng, at)).collect();
            let mut cd: Vec<usize> = cons.iter().map(|&(_, at)| degree(rng, at)).collect();
            if !balance(rng, &prod, &mut pd, &cons, &mut cd) {
                continue 'attempt;
            }
            let mut outs: Vec<usize> = prod
                .iter()
                .zip(&pd)
                .flat_map(|(&(i, _), &n)| std::iter::repeat_n(i, n))
                .collect();
            let mut ins: Vec<usize> = cons
                .iter()
                .zip(&cd)
                .flat_map(|(&(i, _), &n)| std::iter::repeat_n(i, n))
                .collect();
            outs.shuffle(rng);
            ins.shuffle(rng);
            for (f, t) in outs.into_iter().zip(ins) {
                b.add_edge(format!("v{f}"), a.clone(), format!("v{t}"));
            }
        }
        return Some((b.build().unwrap(), typing));
    }
    None
}

fn min_degree(atom: Atom) -> usize {
    match atom {
        Atom::Star => 0,
        Atom::One | Atom::Plus => 1,
    }
}

/// Adjusts flexible degrees until both sides emit the same number of edges.
fn balance(
    rng: &mut impl Rng,
    prod: &[(usize, Atom)],
    pd: &mut [usize],
    cons: &[(usize, Atom)],
    cd: &mut [usize],
) -> bool {
    loop {
        let (p, c): (usize, usize) = (pd.iter().sum(), cd.iter().sum());
        if p == c {
            return true;
        }
        let (short, sd, long, ld) = if p < c {
            (prod, &mut *pd, cons, &mut *cd)
        } else {
            (cons, &mut *cd, prod, &mut *pd)
        };
        let grow: Vec<usize> = (0..short.len())
            .filter(|&i| short[i].1 != Atom::One)
            .collect();
        if let Some(&i) = grow.choose(rng) {
            sd[i] += 1;
            continue;
        }
        let shrink: Vec<usize> = (0..long.len())
            .filter(|&i| ld[i] > min_degree(long[i].1))
            .collect();
        match shrink.choose(rng) {
            Some(&i) => ld[i] -= 1,
            None => return false,
        }
    }
}

/// A random query of the given language with tree height at most `depth`.
/// `alphabet` may include labels the schema does not use.
pub fn random_query(rng: &mut impl Rng, lang: Language, depth: usize, alphabet: &[Label]) -> Query {
    if depth <= 1 || rng.gen_bool(0.2) {
        let choices: &[u8] = match lang {
            Language::Rpq => &[0, 1, 1, 1],
            Language::Nre => &[0, 1, 1, 2, 2],
            Language::Gxpath => &[0, 1, 1, 2, 3],
        };
        return match choices.choose(rng).unwrap() {
            0 => Query::Eps,
            1 => Query::fwd(alphabet.choose(rng).unwrap().clone()),
            2 => Query::bwd(alphabet.choose(rng).unwrap().clone()),
            _ => Query::Any,
        };
    }
    let choices: &[u8] = match lang {
        Language::Rpq => &[0, 1, 1, 2],
        Language::Nre => &[0, 1, 1, 2, 3],
        Language::Gxpath => &[0, 1, 1, 2, 3, 4, 5],
    };
    let sub = |rng: &mut _| random_query(rng, lang, depth - 1, alphabet);
    match choices.choose(rng).unwrap() {
        0 => Query::union(sub(rng), sub(rng)),
        1 => Query::concat(sub(rng), sub(rng)),
        2 => Query::star(sub(rng)),
        3 => Query::test(sub(rng)),
        4 => Query::inter(sub(rng), sub(rng)),
        _ => {
            let m = rng.gen_range(0..3);
            let n = m + rng.gen_range(0..3);
            Query::count(sub(rng), m, n)
        }
    }
}

pub type Rel = BTreeSet<(usize, usize)>;

fn compose(a: &Rel, b: &Rel) -> Rel {
    let mut out = Rel::new();
    for &(x, y) in a {
        for &(y2, z) in b {
            if y == y2 {
                out.insert((x, z));
            }
        }
    }
    out
}

/// Query semantics by direct set manipulation over node indices.
pub fn naive_eval(g: &DataGraph, q: &Query) -> BTreeSet<(NodeId, NodeId)> {
    let ids: Vec<NodeId> = g.node_ids().to_vec();
    let index: HashMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let edges: Vec<(usize, Label, usize)> = g
        .edges()
        .map(|(f, a, t)| (index[f], a.clone(), index[t]))
        .collect();
    naive(ids.len(), &edges, q)
        .into_iter()
        .map(|(i, j)| (ids[i].clone(), ids[j].clone()))
        .collect()
}

fn naive(n: usize, edges: &[(usize, Label, usize)], q: &Query) -> Rel {
    let identity: Rel = (0..n).map(|i| (i, i)).collect();
    match q {
        Query::Eps => identity,
        Query::Any => edges.iter().map(|&(f, _, t)| (f, t)).collect(),
        Query::Fwd(a) => edges
            .iter()
            .filter(|e| &e.1 == a)
            .map(|&(f, _, t)| (f, t))
            .collect(),
        Query::Bwd(a) => edges
            .iter()
            .filter(|e| &e.1 == a)
            .map(|&(f, _, t)| (t, f))
            .collect(),
        Query::Union(x, y) => &naive(n, edges, x) | &naive(n, edges, y),
        Query::Inter(x, y) => &naive(n, edges, x) & &naive(n, edges, y),
        Query::Concat(x, y) => compose(&naive(n, edges, x), &naive(n, edges, y)),
        Query::Test(x) => naive(n, edges, x)
            .into_iter()
            .map(|(u, _)| (u, u))
            .collect(),
        Query::Star(x) => {
            let step = naive(n, edges, x);
            let mut acc = identity;
            loop {
                let next = &acc | &compose(&acc, &step);
                if next == acc {
                    return acc;
                }
                acc = next;
            }
        }
        Query::Count(x, m, k) => {
            let step = naive(n, edges, x);
            let mut power = identity;
            let mut acc = Rel::new();
            for i in 0..=*k {
                if i >= *m {
                    acc.extend(power.iter().copied());
                }
                power = compose(&power, &step);
            }
            acc
        }
    }
}

/// Edge multiset of `g` as sortable triples.
pub fn edge_list(g: &DataGraph) -> Vec<(String, String, String)> {
    let mut out: Vec<_> = g
        .edges()
        .map(|(f, a, t)| (f.to_string(), a.to_string(), t.to_string()))
        .collect();
    out.sort();
    out
}

/// Counts how often each origin appears in a typing.
pub fn origin_histogram(t: &Typing) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for e in t.assignment.values() {
        *out.entry(e.clone()).or_default() += 1;
    }
    out
}
