//! HyperLTL abstract syntax, structural measures and prefix classification.

mod fragment;
mod prefix;
mod prenex;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use fragment::{in_fragment, is_propositional, matrix_in_fragment, strip_next, Fragment};
pub use prefix::{classify_prefix, PrefixPattern};
pub use prenex::{miniscope, prenex};

/// Atomic proposition. Names starting with `@` (or containing `@`) are generated.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prop(Arc<str>);

impl Prop {
    pub fn new(name: &str) -> Prop {
        Prop(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_generated(&self) -> bool {
        self.0.contains('@')
    }
}

impl fmt::Debug for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Prop {
    fn from(s: &str) -> Prop {
        Prop::new(s)
    }
}

/// Trace variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Quantifier::Exists => '∃',
            Quantifier::Forall => '∀',
        }
    }
}

pub type Sub = Arc<Formula>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Prop, Var),
    Not(Sub),
    And(Sub, Sub),
    Or(Sub, Sub),
    Implies(Sub, Sub),
    Iff(Sub, Sub),
    Xor(Sub, Sub),
    Next(Sub),
    Eventually(Sub),
    Always(Sub),
    Until(Sub, Sub),
    Exists(Var, Sub),
    Forall(Var, Sub),
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_formula(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_formula(self))
    }
}

pub fn atom(p: &str, v: &str) -> Formula {
    Formula::Atom(Prop::new(p), Var::new(v))
}

pub fn not(f: Formula) -> Formula {
    Formula::Not(Arc::new(f))
}

pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Arc::new(a), Arc::new(b))
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Arc::new(a), Arc::new(b))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Arc::new(a), Arc::new(b))
}

pub fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Iff(Arc::new(a), Arc::new(b))
}

pub fn xor(a: Formula, b: Formula) -> Formula {
    Formula::Xor(Arc::new(a), Arc::new(b))
}

pub fn next(f: Formula) -> Formula {
    Formula::Next(Arc::new(f))
}

/// `X^k f`.
pub fn next_n(k: usize, f: Formula) -> Formula {
    (0..k).fold(f, |acc, _| next(acc))
}

pub fn eventually(f: Formula) -> Formula {
    Formula::Eventually(Arc::new(f))
}

pub fn always(f: Formula) -> Formula {
    Formula::Always(Arc::new(f))
}

pub fn until(a: Formula, b: Formula) -> Formula {
    Formula::Until(Arc::new(a), Arc::new(b))
}

pub fn exists(v: &Var, f: Formula) -> Formula {
    Formula::Exists(v.clone(), Arc::new(f))
}

pub fn forall(v: &Var, f: Formula) -> Formula {
    Formula::Forall(v.clone(), Arc::new(f))
}

pub fn quantify(q: Quantifier, v: &Var, f: Formula) -> Formula {
    match q {
        Quantifier::Exists => exists(v, f),
        Quantifier::Forall => forall(v, f),
    }
}

/// Conjunction of all items; `true` when empty.
pub fn and_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
    let mut it = items.into_iter();
    match it.next() {
        None => Formula::True,
        Some(first) => it.fold(first, and),
    }
}

/// Disjunction of all items; `false` when empty.
pub fn or_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
    let mut it = items.into_iter();
    match it.next() {
        None => Formula::False,
        Some(first) => it.fold(first, or),
    }
}

impl Formula {
    pub fn is_temporal(&self) -> bool {
        matches!(
            self,
            Formula::Next(_) | Formula::Eventually(_) | Formula::Always(_) | Formula::Until(_, _)
        )
    }

    pub fn is_quantifier(&self) -> bool {
        matches!(self, Formula::Exists(_, _) | Formula::Forall(_, _))
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            True | False | Atom(_, _) => vec![],
            Not(a) | Next(a) | Eventually(a) | Always(a) | Exists(_, a) | Forall(_, a) => {
                vec![a]
            }
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Xor(a, b) | Until(a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn has_quantifier(&self) -> bool {
        self.is_quantifier() || self.children().into_iter().any(|c| c.has_quantifier())
    }

    /// Free trace variables.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        fn go(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(_, v) => {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
                Formula::Exists(v, b) | Formula::Forall(v, b) => {
                    bound.push(v.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                _ => {
                    for c in f.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every variable name occurring, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        fn go(f: &Formula, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(_, v) => {
                    out.insert(v.clone());
                }
                Formula::Exists(v, b) | Formula::Forall(v, b) => {
                    out.insert(v.clone());
                    go(b, out);
                }
                _ => f.children().into_iter().for_each(|c| go(c, out)),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p, _) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Distinct atoms `(prop, var)`.
    pub fn atoms(&self) -> BTreeSet<(Prop, Var)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p, v) = f {
                out.insert((p.clone(), v.clone()));
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<F: FnMut(&Formula)>(&self, f: &mut F) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Rebuilds the formula bottom-up, replacing atoms by `f(prop, var)`.
    /// Binders are left untouched.
    pub fn map_atoms<F: FnMut(&Prop, &Var) -> Formula>(&self, f: &mut F) -> Formula {
        use Formula::*;
        let rec = |g: &Sub, f: &mut F| Arc::new(g.map_atoms(f));
        match self {
            True => True,
            False => False,
            Atom(p, v) => f(p, v),
            Not(a) => Not(rec(a, f)),
            And(a, b) => And(rec(a, f), rec(b, f)),
            Or(a, b) => Or(rec(a, f), rec(b, f)),
            Implies(a, b) => Implies(rec(a, f), rec(b, f)),
            Iff(a, b) => Iff(rec(a, f), rec(b, f)),
            Xor(a, b) => Xor(rec(a, f), rec(b, f)),
            Next(a) => Next(rec(a, f)),
            Eventually(a) => Eventually(rec(a, f)),
            Always(a) => Always(rec(a, f)),
            Until(a, b) => Until(rec(a, f), rec(b, f)),
            Exists(v, a) => Exists(v.clone(), rec(a, f)),
            Forall(v, a) => Forall(v.clone(), rec(a, f)),
        }
    }

    /// Renames the variable of every atom via `f` (no binder handling).
    pub fn rename_vars<F: Fn(&Var) -> Var>(&self, f: &F) -> Formula {
        self.map_atoms(&mut |p, v| Formula::Atom(p.clone(), f(v)))
    }

    /// Number of tree nodes (no sharing).
    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(|c| c.node_count())
            .sum::<usize>()
    }
}

/// Temporal depth: nesting of X, F, G, U.
pub fn temporal_depth(f: &Formula) -> usize {
    let inner = f
        .children()
        .into_iter()
        .map(temporal_depth)
        .max()
        .unwrap_or(0);
    if f.is_temporal() {
        inner + 1
    } else {
        inner
    }
}

/// Alternation depth of an arbitrary formula: the largest number of
/// quantifier-kind switches along any path, with negation flipping polarity
/// and the left side of `->` counted negatively. `<->` and `xor` operands
/// are counted in both polarities.
pub fn formula_alternation_depth(f: &Formula) -> usize {
    // best[q] = max switches of a path whose first quantifier has kind q
    fn go(f: &Formula, pos: bool) -> [Option<usize>; 2] {
        use Formula::*;
        let merge = |a: [Option<usize>; 2], b: [Option<usize>; 2]| [a[0].max(b[0]), a[1].max(b[1])];
        match f {
            True | False | Atom(_, _) => [None, None],
            Not(a) => go(a, !pos),
            And(a, b) | Or(a, b) => merge(go(a, pos), go(b, pos)),
            Implies(a, b) => merge(go(a, !pos), go(b, pos)),
            Iff(a, b) | Xor(a, b) => merge(
                merge(go(a, pos), go(a, !pos)),
                merge(go(b, pos), go(b, !pos)),
            ),
            Next(a) | Eventually(a) | Always(a) => go(a, pos),
            Until(a, b) => merge(go(a, pos), go(b, pos)),
            Exists(_, b) | Forall(_, b) => {
                let q = matches!(f, Exists(_, _)) == pos;
                let idx = if q { 0 } else { 1 };
                let inner = go(b, pos);
                let same = inner[idx].unwrap_or(0);
                let other = inner[1 - idx].map(|x| x + 1).unwrap_or(0);
                let mut out = [None, None];
                out[idx] = Some(same.max(other));
                out
            }
        }
    }
    let r = go(f, true);
    r[0].max(r[1]).unwrap_or(0)
}

/// Number of distinct subformulas.
pub fn size(f: &Formula) -> usize {
    let mut seen: HashSet<&Formula> = HashSet::new();
    fn go<'a>(f: &'a Formula, seen: &mut HashSet<&'a Formula>) {
        if seen.insert(f) {
            for c in f.children() {
                go(c, seen);
            }
        }
    }
    go(f, &mut seen);
    seen.len()
}

/// Replaces free occurrences of `from` by `to`.
pub fn substitute(f: &Formula, from: &Var, to: &Var) -> Result<Formula> {
    if from == to {
        return Ok(f.clone());
    }
    fn go(f: &Formula, from: &Var, to: &Var) -> Result<Formula> {
        use Formula::*;
        let rec = |g: &Sub| go(g, from, to).map(Arc::new);
        Ok(match f {
            True => True,
            False => False,
            Atom(p, v) => {
                if v == from {
                    Atom(p.clone(), to.clone())
                } else {
                    f.clone()
                }
            }
            Exists(v, b) | Forall(v, b) => {
                if v == from {
                    return Ok(f.clone());
                }
                if v == to && b.free_vars().contains(from) {
                    return Err(Error::Capture {
                        from: from.to_string(),
                        to: to.to_string(),
                    });
                }
                let nb = rec(b)?;
                if matches!(f, Exists(_, _)) {
                    Exists(v.clone(), nb)
                } else {
                    Forall(v.clone(), nb)
                }
            }
            Not(a) => Not(rec(a)?),
            And(a, b) => And(rec(a)?, rec(b)?),
            Or(a, b) => Or(rec(a)?, rec(b)?),
            Implies(a, b) => Implies(rec(a)?, rec(b)?),
            Iff(a, b) => Iff(rec(a)?, rec(b)?),
            Xor(a, b) => Xor(rec(a)?, rec(b)?),
            Next(a) => Next(rec(a)?),
            Eventually(a) => Eventually(rec(a)?),
            Always(a) => Always(rec(a)?),
            Until(a, b) => Until(rec(a)?, rec(b)?),
        })
    }
    go(f, from, to)
}

/// A prenex sentence: quantifier prefix over a quantifier-free matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub prefix: Vec<(Quantifier, Var)>,
    pub matrix: Formula,
}

impl fmt::Debug for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_sentence(self))
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_sentence(self))
    }
}

impl Sentence {
    /// Validates closedness, distinct prefix variables and a quantifier-free matrix.
    pub fn new(prefix: Vec<(Quantifier, Var)>, matrix: Formula) -> Result<Sentence> {
        let mut seen = BTreeSet::new();
        for (_, v) in &prefix {
            if !seen.insert(v.clone()) {
                return Err(Error::DuplicateVariable(v.to_string()));
            }
        }
        if matrix.has_quantifier() {
            return Err(Error::QuantifiedMatrix);
        }
        if let Some(v) = matrix.free_vars().into_iter().find(|v| !seen.contains(v)) {
            return Err(Error::NotClosed(v.to_string()));
        }
        Ok(Sentence { prefix, matrix })
    }

    pub fn vars(&self) -> Vec<Var> {
        self.prefix.iter().map(|(_, v)| v.clone()).collect()
    }

    pub fn kinds(&self) -> Vec<Quantifier> {
        self.prefix.iter().map(|(q, _)| *q).collect()
    }

    pub fn to_formula(&self) -> Formula {
        self.prefix
            .iter()
            .rev()
            .fold(self.matrix.clone(), |acc, (q, v)| quantify(*q, v, acc))
    }

    pub fn props(&self) -> BTreeSet<Prop> {
        self.matrix.props()
    }

    pub fn temporal_depth(&self) -> usize {
        temporal_depth(&self.matrix)
    }

    pub fn alternation_depth(&self) -> usize {
        alternation_depth(self)
    }

    pub fn count(&self, q: Quantifier) -> usize {
        self.prefix.iter().filter(|(k, _)| *k == q).count()
    }
}

/// Number of quantifier-kind switches in the prefix.
pub fn alternation_depth(s: &Sentence) -> usize {
    s.prefix.windows(2).filter(|w| w[0].0 != w[1].0).count()
}

/// A variable name based on `base` that does not occur in `used`; records it.
pub fn fresh_var(base: &str, used: &mut BTreeSet<Var>) -> Var {
    let mut cand = Var::new(base);
    let mut i = 1;
    while used.contains(&cand) {
        cand = Var::new(&format!("{base}_{i}"));
        i += 1;
    }
    used.insert(cand.clone());
    cand
}

/// A proposition name based on `base` that does not occur in `used`; records it.
pub fn fresh_prop(base: &str, used: &mut BTreeSet<Prop>) -> Prop {
    let mut cand = Prop::new(base);
    let mut i = 1;
    while used.contains(&cand) {
        cand = Prop::new(&format!("{base}_{i}"));
        i += 1;
    }
    used.insert(cand.clone());
    cand
}
