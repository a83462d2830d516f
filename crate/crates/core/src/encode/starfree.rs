use std::collections::BTreeSet;
use std::fmt;

use crate::error::Result;
use crate::formula::{
    always, and, and_all, atom, eventually, exists, forall, fresh_var, iff, not, or, prenex,
    Formula, Sentence, Var,
};
use crate::semantics::{valuation, FiniteTraceModel, KripkeStructure, LassoTrace, Valuation};

/// Star-free expressions with complement over `{a, b}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StarFreeExpr {
    A,
    B,
    Epsilon,
    Empty,
    Sum(Box<StarFreeExpr>, Box<StarFreeExpr>),
    Concat(Box<StarFreeExpr>, Box<StarFreeExpr>),
    Complement(Box<StarFreeExpr>),
}

impl StarFreeExpr {
    pub fn sum(a: StarFreeExpr, b: StarFreeExpr) -> StarFreeExpr {
        StarFreeExpr::Sum(Box::new(a), Box::new(b))
    }

    pub fn concat(a: StarFreeExpr, b: StarFreeExpr) -> StarFreeExpr {
        StarFreeExpr::Concat(Box::new(a), Box::new(b))
    }

    pub fn complement(a: StarFreeExpr) -> StarFreeExpr {
        StarFreeExpr::Complement(Box::new(a))
    }

    pub fn size(&self) -> usize {
        use StarFreeExpr::*;
        match self {
            A | B | Epsilon | Empty => 1,
            Sum(x, y) | Concat(x, y) => 1 + x.size() + y.size(),
            Complement(x) => 1 + x.size(),
        }
    }

    /// Membership of a word over `{a, b}`.
    pub fn matches(&self, w: &str) -> bool {
        use StarFreeExpr::*;
        match self {
            A => w == "a",
            B => w == "b",
            Epsilon => w.is_empty(),
            Empty => false,
            Sum(x, y) => x.matches(w) || y.matches(w),
            Concat(x, y) => (0..=w.len()).any(|i| x.matches(&w[..i]) && y.matches(&w[i..])),
            Complement(x) => !x.matches(w),
        }
    }

    /// Parses `a`, `b`, `eps`, `empty`, `+`, juxtaposition/`.`, `~`/`!` and parentheses.
    pub fn parse(text: &str) -> Option<StarFreeExpr> {
        let toks: Vec<String> = tokenize(text)?;
        let mut pos = 0;
        let e = parse_sum(&toks, &mut pos)?;
        (pos == toks.len()).then_some(e)
    }
}

fn tokenize(text: &str) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let cs: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_alphabetic() {
                i += 1;
            }
            let word: String = cs[start..i].iter().collect();
            match word.as_str() {
                "eps" | "empty" => out.push(word),
                w if w.chars().all(|c| c == 'a' || c == 'b') => {
                    out.extend(w.chars().map(|c| c.to_string()))
                }
                _ => return None,
            }
        } else if "()+.~!".contains(c) {
            out.push(c.to_string());
            i += 1;
        } else {
            return None;
        }
    }
    Some(out)
}

fn parse_sum(t: &[String], pos: &mut usize) -> Option<StarFreeExpr> {
    let mut e = parse_cat(t, pos)?;
    while t.get(*pos).map(String::as_str) == Some("+") {
        *pos += 1;
        e = StarFreeExpr::sum(e, parse_cat(t, pos)?);
    }
    Some(e)
}

fn parse_cat(t: &[String], pos: &mut usize) -> Option<StarFreeExpr> {
    let mut e = parse_unary(t, pos)?;
    loop {
        match t.get(*pos).map(String::as_str) {
            Some(".") => {
                *pos += 1;
                e = StarFreeExpr::concat(e, parse_unary(t, pos)?);
            }
            Some("a" | "b" | "eps" | "empty" | "(" | "~" | "!") => {
                e = StarFreeExpr::concat(e, parse_unary(t, pos)?);
            }
            _ => return Some(e),
        }
    }
}

fn parse_unary(t: &[String], pos: &mut usize) -> Option<StarFreeExpr> {
    let tok = t.get(*pos)?.clone();
    *pos += 1;
    match tok.as_str() {
        "a" => Some(StarFreeExpr::A),
        "b" => Some(StarFreeExpr::B),
        "eps" => Some(StarFreeExpr::Epsilon),
        "empty" => Some(StarFreeExpr::Empty),
        "~" | "!" => Some(StarFreeExpr::complement(parse_unary(t, pos)?)),
        "(" => {
            let e = parse_sum(t, pos)?;
            (t.get(*pos).map(String::as_str) == Some(")")).then(|| *pos += 1)?;
            Some(e)
        }
        _ => None,
    }
}

impl fmt::Display for StarFreeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StarFreeExpr::*;
        match self {
            A => write!(f, "a"),
            B => write!(f, "b"),
            Epsilon => write!(f, "eps"),
            Empty => write!(f, "empty"),
            Sum(x, y) => write!(f, "({x} + {y})"),
            Concat(x, y) => write!(f, "({x} . {y})"),
            Complement(x) => write!(f, "~{x}"),
        }
    }
}

const HASH: &str = "hash";

/// `ψ_{e,π}` with `v` free; fresh witness variables are drawn from `used`.
pub fn psi_e(e: &StarFreeExpr, v: &Var, used: &mut BTreeSet<Var>) -> Formula {
    use StarFreeExpr::*;
    let p = v.name();
    match e {
        Empty => and(atom("a", p), not(atom("a", p))),
        Epsilon => always(or(atom("l", p), atom("r", p))),
        A | B => {
            let t = fresh_var("w", used);
            let letter = if *e == A { "a" } else { "b" };
            exists(
                &t,
                and_all([
                    eventually(atom(HASH, t.name())),
                    eventually(atom(letter, p)),
                    always(and(
                        iff(atom("l", t.name()), atom("l", p)),
                        iff(atom("r", t.name()), atom("r", p)),
                    )),
                ]),
            )
        }
        Sum(x, y) => or(psi_e(x, v, used), psi_e(y, v, used)),
        Concat(x, y) => {
            let p1 = fresh_var("w", used);
            let p2 = fresh_var("w", used);
            let (n1, n2) = (p1.name(), p2.name());
            let first = psi_e(x, &p1, used);
            let second = psi_e(y, &p2, used);
            let shape = and_all([
                eventually(atom("r", n1)),
                eventually(atom("r", n2)),
                always(and(not(atom(HASH, n1)), not(atom(HASH, n2)))),
                first,
                second,
            ]);
            let glue = and(
                always(iff(atom("l", n2), not(atom("r", n1)))),
                always(and(
                    iff(atom("a", p), or(atom("a", n1), atom("a", n2))),
                    iff(atom("b", p), or(atom("b", n1), atom("b", n2))),
                )),
            );
            exists(&p1, exists(&p2, and(shape, glue)))
        }
        Complement(x) => not(psi_e(x, v, used)),
    }
}

/// `φ_e = ∀π. G ¬r_π ∨ F hash_π ∨ ψ_{e,π}`, prenexed.
pub fn encode_starfree(e: &StarFreeExpr) -> Result<Sentence> {
    let v = Var::new("p");
    let mut used: BTreeSet<Var> = [v.clone()].into();
    let body = or(
        or(always(not(atom("r", "p"))), eventually(atom(HASH, "p"))),
        psi_e(e, &v, &mut used),
    );
    prenex(&forall(&v, body))
}

/// The five-state structure over `l, a, b, r, hash`; all states initial.
pub fn word_structure() -> KripkeStructure {
    let names = ["l", "a", "b", "r", HASH];
    let edges: [(usize, usize); 13] = [
        (0, 0),
        (0, 1),
        (0, 2),
        (0, 3),
        (0, 4),
        (1, 1),
        (1, 2),
        (1, 3),
        (2, 2),
        (2, 1),
        (2, 3),
        (3, 3),
        (4, 3),
    ];
    let mut succ = vec![BTreeSet::new(); 5];
    for (a, b) in edges {
        succ[a].insert(b);
    }
    KripkeStructure::new(
        names.iter().map(|s| s.to_string()).collect(),
        names.iter().map(|s| valuation(&[s])).collect(),
        (0..5).collect(),
        succ,
    )
    .expect("well-formed structure")
}

/// `l^i w r^ω` for a word over `{a, b}`.
pub fn word_trace(i: usize, w: &str) -> LassoTrace {
    let mut stem: Vec<Valuation> = vec![valuation(&["l"]); i];
    stem.extend(
        w.chars()
            .map(|c| valuation(&[if c == 'a' { "a" } else { "b" }])),
    );
    LassoTrace::raw(stem, vec![valuation(&["r"])]).canonical()
}

fn words(max: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            for c in ["a", "b"] {
                next.push(format!("{w}{c}"));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Witness-closed finite sample: all `l^i u r^ω` with `i + |u| ≤ n` and all
/// `l^i hash r^ω` with `i ≤ n`.
pub fn starfree_sample(n: usize) -> FiniteTraceModel {
    let mut out = Vec::new();
    for w in words(n) {
        for i in 0..=n - w.len() {
            out.push(word_trace(i, &w));
        }
    }
    for i in 0..=n {
        let mut stem = vec![valuation(&["l"]); i];
        stem.push(valuation(&[HASH]));
        out.push(LassoTrace::raw(stem, vec![valuation(&["r"])]).canonical());
    }
    FiniteTraceModel::new(out).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::eval_formula;

    fn holds(e: &StarFreeExpr, w: &str) -> bool {
        let v = Var::new("p");
        let mut used: BTreeSet<Var> = [v.clone()].into();
        let f = psi_e(e, &v, &mut used);
        eval_formula(&f, &starfree_sample(3), &[(v, word_trace(0, w))]).unwrap()
    }

    #[test]
    fn base_cases() {
        use StarFreeExpr::*;
        assert!(holds(&Epsilon, ""));
        assert!(!holds(&Epsilon, "a"));
        assert!(holds(&A, "a"));
        assert!(!holds(&A, "b"));
        assert!(!holds(&A, "aa"));
        assert!(!holds(&Empty, ""));
    }

    #[test]
    fn concat_and_complement() {
        let e = StarFreeExpr::parse("a b + ~(a + b + eps)").unwrap();
        for w in words(3) {
            assert_eq!(holds(&e, &w), e.matches(&w), "{w}");
        }
    }

    #[test]
    fn structure() {
        let k = word_structure();
        assert_eq!(k.len(), 5);
        assert_eq!(k.initial().len(), 5);
        assert_eq!(
            crate::formula::temporal_depth(&encode_starfree(&StarFreeExpr::A).unwrap().matrix),
            1
        );
    }
}
