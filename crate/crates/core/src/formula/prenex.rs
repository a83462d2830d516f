use std::collections::BTreeSet;
use std::sync::Arc;

use super::{and, implies, not, or, quantify, substitute, Formula, Quantifier, Sentence, Var};
use crate::error::{Error, Result};

type Prefix = Vec<(Quantifier, Var)>;

/// Hoists all quantifiers to the front.
///
/// Quantifiers from sibling subformulas are interleaved so that the number
/// of quantifier blocks is minimal while each operand keeps its own order.
/// Bound variables are renamed when a name is reused.
pub fn prenex(f: &Formula) -> Result<Sentence> {
    if let Some(v) = f.free_vars().into_iter().next() {
        return Err(Error::NotClosed(v.to_string()));
    }
    check_no_quantifier_under_temporal(f, false)?;
    let avoid = f.all_vars();
    let mut claimed = BTreeSet::new();
    let (prefix, matrix) = pull(f, &avoid, &mut claimed)?;
    Sentence::new(prefix, matrix)
}

fn check_no_quantifier_under_temporal(f: &Formula, under: bool) -> Result<()> {
    match f {
        Formula::Exists(v, _) | Formula::Forall(v, _) if under => {
            Err(Error::QuantifierUnderTemporal(v.to_string()))
        }
        _ => {
            let under = under || f.is_temporal();
            for c in f.children() {
                check_no_quantifier_under_temporal(c, under)?;
            }
            Ok(())
        }
    }
}

fn claim(v: &Var, avoid: &BTreeSet<Var>, claimed: &mut BTreeSet<Var>) -> Var {
    if !claimed.contains(v) {
        claimed.insert(v.clone());
        return v.clone();
    }
    let mut i = 1;
    loop {
        let cand = Var::new(&format!("{}_{}", v.name(), i));
        if !avoid.contains(&cand) && !claimed.contains(&cand) {
            claimed.insert(cand.clone());
            return cand;
        }
        i += 1;
    }
}

fn dualize(p: Prefix) -> Prefix {
    p.into_iter().map(|(q, v)| (q.dual(), v)).collect()
}

fn pull(
    f: &Formula,
    avoid: &BTreeSet<Var>,
    claimed: &mut BTreeSet<Var>,
) -> Result<(Prefix, Formula)> {
    use Formula::*;
    if !f.has_quantifier() {
        return Ok((vec![], f.clone()));
    }
    Ok(match f {
        Not(a) => {
            let (p, m) = pull(a, avoid, claimed)?;
            (dualize(p), not(m))
        }
        And(a, b) | Or(a, b) | Implies(a, b) => {
            let (pa, ma) = pull(a, avoid, claimed)?;
            let (pb, mb) = pull(b, avoid, claimed)?;
            let pa = if matches!(f, Implies(_, _)) {
                dualize(pa)
            } else {
                pa
            };
            let m = match f {
                And(_, _) => and(ma, mb),
                Or(_, _) => or(ma, mb),
                _ => implies(ma, mb),
            };
            (merge_prefixes(vec![pa, pb]), m)
        }
        Iff(a, b) => {
            let a = (**a).clone();
            let b = (**b).clone();
            let e = and(implies(a.clone(), b.clone()), implies(b, a));
            pull(&e, avoid, claimed)?
        }
        Xor(a, b) => {
            let a = (**a).clone();
            let b = (**b).clone();
            let e = or(and(a.clone(), not(b.clone())), and(not(a), b));
            pull(&e, avoid, claimed)?
        }
        Exists(v, body) | Forall(v, body) => {
            let q = if matches!(f, Exists(_, _)) {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            };
            let nv = claim(v, avoid, claimed);
            let body = substitute(body, v, &nv)?;
            let (mut p, m) = pull(&body, avoid, claimed)?;
            p.insert(0, (q, nv));
            (p, m)
        }
        // quantifiers under temporal operators were rejected before
        _ => unreachable!("quantifier under temporal operator"),
    })
}

/// Interleaves prefixes keeping each one's order, minimizing the number of blocks.
fn merge_prefixes(parts: Vec<Prefix>) -> Prefix {
    let parts: Vec<Prefix> = parts.into_iter().filter(|p| !p.is_empty()).collect();
    if parts.len() <= 1 {
        return parts.into_iter().next().unwrap_or_default();
    }
    let greedy = |start: Quantifier| -> Prefix {
        let mut idx = vec![0usize; parts.len()];
        let mut out = Vec::new();
        let mut cur = start;
        while idx.iter().zip(&parts).any(|(i, p)| *i < p.len()) {
            for (i, p) in idx.iter_mut().zip(&parts) {
                while *i < p.len() && p[*i].0 == cur {
                    out.push(p[*i].clone());
                    *i += 1;
                }
            }
            cur = cur.dual();
        }
        out
    };
    let blocks = |p: &Prefix| p.windows(2).filter(|w| w[0].0 != w[1].0).count();
    let first = parts[0][0].0;
    let a = greedy(first);
    let b = greedy(first.dual());
    if blocks(&b) < blocks(&a) {
        b
    } else {
        a
    }
}

/// Pushes the prefix of `s` inwards through Boolean connectives wherever a
/// quantified variable does not occur in an operand. Equivalent to `s` over
/// every nonempty trace set.
pub fn miniscope(s: &Sentence) -> Formula {
    s.prefix
        .iter()
        .rev()
        .fold(s.matrix.clone(), |acc, (q, v)| push(*q, v, &acc))
}

fn push(q: Quantifier, v: &Var, f: &Formula) -> Formula {
    use Formula::{And, Implies, Not, Or};
    use Quantifier::{Exists as Ex, Forall as All};
    let has = |g: &Arc<Formula>| g.free_vars().contains(v);
    if !f.free_vars().contains(v) {
        return f.clone();
    }
    match (q, f) {
        (_, Not(a)) => not(push(q.dual(), v, a)),
        (All, And(a, b)) => and(push(q, v, a), push(q, v, b)),
        (Ex, Or(a, b)) => or(push(q, v, a), push(q, v, b)),
        (Ex, And(a, b)) | (All, Or(a, b)) => {
            let rebuild = |x: Formula, y: Formula| {
                if matches!(f, And(_, _)) {
                    and(x, y)
                } else {
                    or(x, y)
                }
            };
            if !has(a) {
                rebuild((**a).clone(), push(q, v, b))
            } else if !has(b) {
                rebuild(push(q, v, a), (**b).clone())
            } else {
                quantify(q, v, f.clone())
            }
        }
        (_, Implies(a, b)) => {
            if !has(a) {
                implies((**a).clone(), push(q, v, b))
            } else if !has(b) {
                implies(push(q.dual(), v, a), (**b).clone())
            } else if q == All {
                quantify(q, v, f.clone())
            } else {
                // ∃v.(a → b) = (∀v.a) → ∃v.b
                implies(push(All, v, a), push(Ex, v, b))
            }
        }
        _ => quantify(q, v, f.clone()),
    }
}
