//! Schema emptiness as a homogeneous system of diophantine equations.
//!
//! Each element gets a variable counting its nodes; each label gets an
//! equation balancing produced against consumed edges. Repetitions become
//! parameters multiplying the coefficients. Star-free systems are decided
//! by bounded search; parametric ones are only displayed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::rex::{Label, Regex};
use crate::schema::{RawSchema, Side};

pub const DEFAULT_BOUND: u64 = 16;

/// `coefficient * h_p1 * ... * variable`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    pub coefficient: i64,
    /// 1-based parameter numbers, ascending.
    pub parameters: Vec<usize>,
    pub variable: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub label: Label,
    /// Ordered by variable, then parameters. Zero coefficients are dropped.
    pub terms: Vec<Term>,
}

/// A repetition in some regex, turned into a natural-valued parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Parameter {
    pub element: String,
    pub side: Side,
    /// Nesting depth of the repetition, starting at 1.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DioSystem {
    /// Variable names, one per element in schema order.
    pub variables: Vec<String>,
    pub elements: Vec<String>,
    /// `parameters[k]` is `h{k+1}`.
    pub parameters: Vec<Parameter>,
    /// One per label, sorted by label.
    pub equations: Vec<Equation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "element `{element}` has a union in its {side} regex; \
     encode each combination of union branches separately"
)]
pub struct UnionPresent {
    pub element: String,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("the system has {0} parameter(s) and cannot be decided by search")]
pub struct Parametric(pub usize);

/// `x, y, z, w, u, v`, then `x7, x8, ...`.
pub fn variable_name(k: usize) -> String {
    const NAMES: [&str; 6] = ["x", "y", "z", "w", "u", "v"];
    NAMES
        .get(k)
        .map_or_else(|| format!("x{}", k + 1), |n| n.to_string())
}

/// Builds the system of a union-free schema. The regexes need not be
/// conflict-free: repeated labels add up.
///
/// Parameters are numbered by nesting depth first, then by element, with
/// the `in` regex before the `out` one and left to right within a regex.
pub fn build_system(s: &RawSchema) -> Result<DioSystem, UnionPresent> {
    let mut reps = Vec::new();
    for (k, e) in s.elements().iter().enumerate() {
        for side in [Side::In, Side::Out] {
            if !e.regex(side).is_union_free() {
                return Err(UnionPresent {
                    element: e.name.clone(),
                    side,
                });
            }
            let mut found = Vec::new();
            collect_repetitions(e.regex(side), 1, &mut found);
            reps.extend(
                found
                    .into_iter()
                    .enumerate()
                    .map(|(pos, depth)| (depth, k, side, pos)),
            );
        }
    }
    reps.sort();
    let number: BTreeMap<(usize, Side, usize), usize> = reps
        .iter()
        .enumerate()
        .map(|(n, &(_, k, side, pos))| ((k, side, pos), n + 1))
        .collect();
    let parameters = reps
        .iter()
        .map(|&(depth, k, side, _)| Parameter {
            element: s.elements()[k].name.clone(),
            side,
            depth,
        })
        .collect();

    // (label, variable, parameters) -> coefficient
    let mut coefficients: BTreeMap<(Label, usize, Vec<usize>), i64> = BTreeMap::new();
    let mut labels = BTreeSet::new();
    for (k, e) in s.elements().iter().enumerate() {
        for (side, sign) in [(Side::In, -1), (Side::Out, 1)] {
            let mut occurrences = Vec::new();
            let mut walk = Walk {
                next: 0,
                lookup: |pos| number[&(k, side, pos)],
                out: &mut occurrences,
            };
            walk.visit(e.regex(side), &mut Vec::new());
            for (label, mut params) in occurrences {
                params.sort_unstable();
                labels.insert(label.clone());
                *coefficients.entry((label, k, params)).or_default() += sign;
            }
        }
    }
    let equations = labels
        .into_iter()
        .map(|label| Equation {
            terms: coefficients
                .range((label.clone(), 0, Vec::new())..)
                .take_while(|((l, _, _), _)| *l == label)
                .filter(|(_, &c)| c != 0)
                .map(|((_, variable, parameters), &coefficient)| Term {
                    coefficient,
                    parameters: parameters.clone(),
                    variable: *variable,
                })
                .collect(),
            label,
        })
        .collect();
    Ok(DioSystem {
        variables: (0..s.elements().len()).map(variable_name).collect(),
        elements: s.elements().iter().map(|e| e.name.clone()).collect(),
        parameters,
        equations,
    })
}

/// Depths of the repetitions of `t`, in preorder.
fn collect_repetitions(t: &Regex, depth: usize, out: &mut Vec<usize>) {
    match t {
        Regex::Epsilon | Regex::Sym(_) => {}
        Regex::Union(l, r) | Regex::Concat(l, r) => {
            collect_repetitions(l, depth, out);
            collect_repetitions(r, depth, out);
        }
        Regex::Star(inner) | Regex::Plus(inner) => {
            out.push(depth);
            collect_repetitions(inner, depth + 1, out);
        }
    }
}

/// Label occurrences with the parameters of their enclosing repetitions.
struct Walk<'a, F> {
    next: usize,
    lookup: F,
    out: &'a mut Vec<(Label, Vec<usize>)>,
}

impl<F: Fn(usize) -> usize> Walk<'_, F> {
    fn visit(&mut self, t: &Regex, enclosing: &mut Vec<usize>) {
        match t {
            Regex::Epsilon => {}
            Regex::Sym(a) => self.out.push((a.clone(), enclosing.clone())),
            Regex::Union(l, r) | Regex::Concat(l, r) => {
                self.visit(l, enclosing);
                self.visit(r, enclosing);
            }
            Regex::Star(inner) | Regex::Plus(inner) => {
                let h = (self.lookup)(self.next);
                self.next += 1;
                enclosing.push(h);
                self.visit(inner, enclosing);
                enclosing.pop();
            }
        }
    }
}

impl DioSystem {
    pub fn is_parametric(&self) -> bool {
        !self.parameters.is_empty()
    }

    /// Value of each equation's left-hand side under `values`, for a system
    /// without parameters.
    pub fn residuals(&self, values: &[u64]) -> Vec<i128> {
        self.equations
            .iter()
            .map(|eq| {
                eq.terms
                    .iter()
                    .map(|t| t.coefficient as i128 * values[t.variable] as i128)
                    .sum()
            })
            .collect()
    }

    pub fn is_solution(&self, values: &[u64]) -> bool {
        values.len() == self.variables.len() && self.residuals(values).iter().all(|&r| r == 0)
    }

    fn render_term(&self, t: &Term, first: bool, explicit: bool) -> String {
        let magnitude = t.coefficient.unsigned_abs();
        let mut factors: Vec<String> = Vec::new();
        if magnitude != 1 {
            factors.push(magnitude.to_string());
        }
        factors.extend(t.parameters.iter().map(|h| format!("h{h}")));
        factors.push(self.variables[t.variable].clone());
        let body = factors.join(if explicit { "*" } else { "" });
        match (first, t.coefficient < 0) {
            (true, false) => body,
            (true, true) => format!("-{body}"),
            (false, false) => format!(" + {body}"),
            (false, true) => format!(" - {body}"),
        }
    }
}

impl fmt::Display for DioSystem {
    /// One `label: lhs = 0` line per equation. Factors are juxtaposed
    /// (`2x`) in systems without parameters and joined by `*` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let explicit = self.is_parametric();
        for (k, eq) in self.equations.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{}: ", eq.label)?;
            if eq.terms.is_empty() {
                f.write_str("0")?;
            }
            for (i, t) in eq.terms.iter().enumerate() {
                f.write_str(&self.render_term(t, i == 0, explicit))?;
            }
            f.write_str(" = 0")?;
        }
        Ok(())
    }
}

pub fn render_system(sys: &DioSystem) -> String {
    sys.to_string()
}

/// A non-trivial solution of a system without parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Solution {
    /// Indexed like the system's variables.
    pub values: Vec<u64>,
    /// Variable name to value.
    pub assignment: BTreeMap<String, u64>,
}

/// The lexicographically first non-zero solution with every value at most
/// `bound`, if any.
pub fn solve_star_free(sys: &DioSystem, bound: u64) -> Result<Option<Solution>, Parametric> {
    if sys.is_parametric() {
        return Err(Parametric(sys.parameters.len()));
    }
    let n = sys.variables.len();
    // coefficient rows, per equation
    let rows: Vec<Vec<i128>> = sys
        .equations
        .iter()
        .map(|eq| {
            let mut row = vec![0i128; n];
            for t in &eq.terms {
                row[t.variable] += t.coefficient as i128;
            }
            row
        })
        .collect();
    let mut search = Search {
        rows: &rows,
        bound: bound as i128,
        values: Vec::with_capacity(n),
        partial: vec![0; rows.len()],
    };
    Ok(search.run(n).then(|| {
        let values: Vec<u64> = search.values.iter().map(|&v| v as u64).collect();
        Solution {
            assignment: sys
                .variables
                .iter()
                .cloned()
                .zip(values.iter().copied())
                .collect(),
            values,
        }
    }))
}

/// Depth-first search in lexicographic order. A branch is cut when some
/// equation can no longer reach zero with the remaining variables in
/// `0..=bound`, which never skips a solution.
struct Search<'a> {
    rows: &'a [Vec<i128>],
    bound: i128,
    values: Vec<i128>,
    partial: Vec<i128>,
}

impl Search<'_> {
    fn run(&mut self, n: usize) -> bool {
        let k = self.values.len();
        if k == n {
            return self.values.iter().any(|&v| v > 0) && self.partial.iter().all(|&p| p == 0);
        }
        for v in 0..=self.bound {
            for (p, row) in self.partial.iter_mut().zip(self.rows) {
                *p += row[k] * v;
            }
            self.values.push(v);
            if self.reachable(k + 1) && self.run(n) {
                return true;
            }
            self.values.pop();
            for (p, row) in self.partial.iter_mut().zip(self.rows) {
                *p -= row[k] * v;
            }
        }
        false
    }

    fn reachable(&self, from: usize) -> bool {
        self.rows.iter().zip(&self.partial).all(|(row, &p)| {
            let (lo, hi) = row[from..].iter().fold((p, p), |(lo, hi), &c| {
                let span = c * self.bound;
                (lo + span.min(0), hi + span.max(0))
            });
            lo <= 0 && 0 <= hi
        })
    }
}

/// Outcome of the emptiness analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EmptinessVerdict {
    /// Node counts per element admitting a conforming graph.
    Nonempty { certificate: Solution },
    /// No solution in the searched box; the schema may still be non-empty.
    NoSolutionWithinBound { bound: u64 },
    /// The system has parameters and is not decided.
    UndecidedParametric,
}

pub fn decide(sys: &DioSystem, bound: u64) -> EmptinessVerdict {
    match solve_star_free(sys, bound) {
        Ok(Some(certificate)) => EmptinessVerdict::Nonempty { certificate },
        Ok(None) => EmptinessVerdict::NoSolutionWithinBound { bound },
        Err(Parametric(_)) => EmptinessVerdict::UndecidedParametric,
    }
}
