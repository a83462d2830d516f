use std::collections::BTreeSet;

use super::used_vars;
use crate::error::{Error, Result};
use crate::formula::{
    always, and, and_all, eventually, fresh_var, implies, in_fragment, is_propositional, not,
    or_all, strip_next, xor, Formula, Fragment, Prop, Quantifier, Sentence, Var,
};
use crate::semantics::{valuation, FiniteTraceModel, LassoTrace};

fn marker(k: usize) -> Prop {
    Prop::new(&format!("@m{k}"))
}

fn max_next(f: &Formula) -> usize {
    match f {
        Formula::Next(_) => strip_next(f).0,
        _ => f.children().into_iter().map(max_next).max().unwrap_or(0),
    }
}

fn rewrite(f: &Formula, tau0: &Var) -> Formula {
    use Formula as Fm;
    let guard =
        |k: usize, b: &Formula| always(implies(Fm::Atom(marker(k), tau0.clone()), b.clone()));
    match f {
        Fm::True | Fm::False => f.clone(),
        Fm::Next(_) => {
            let (k, b) = strip_next(f);
            guard(k, b)
        }
        Fm::Eventually(_) | Fm::Always(_) => f.clone(),
        _ if is_propositional(f) => guard(0, f),
        Fm::Not(a) => not(rewrite(a, tau0)),
        Fm::And(a, b) => and(rewrite(a, tau0), rewrite(b, tau0)),
        Fm::Or(a, b) => crate::formula::or(rewrite(a, tau0), rewrite(b, tau0)),
        Fm::Implies(a, b) => implies(rewrite(a, tau0), rewrite(b, tau0)),
        Fm::Iff(a, b) => crate::formula::iff(rewrite(a, tau0), rewrite(b, tau0)),
        Fm::Xor(a, b) => xor(rewrite(a, tau0), rewrite(b, tau0)),
        _ => unreachable!("checked fragment"),
    }
}

/// Replaces `X^k β` by `G(m^k_τ0 ⇒ β)` against a fresh marker trace `τ0`.
///
/// Every original existential is additionally kept off the marker trace,
/// and a marker-free witness is demanded when no existential precedes the
/// universal; without these, the marker trace alone would model the output.
pub fn eliminate_x(s: &Sentence) -> Result<Sentence> {
    if !in_fragment(s, Fragment::FGX1) || s.count(Quantifier::Forall) != 1 {
        return Err(Error::Shape(
            "eliminate_x needs an ∃*∀∃* FGX1 sentence".into(),
        ));
    }
    let d = max_next(&s.matrix);
    let mut used = used_vars(s);
    let tau0 = fresh_var("x0", &mut used);
    let ms: Vec<Prop> = (0..=d).map(marker).collect();
    let pos = s
        .kinds()
        .iter()
        .position(|q| *q == Quantifier::Forall)
        .expect("one universal");
    let pi = s.prefix[pos].1.clone();
    let clean = |v: &Var| {
        always(and_all(
            ms.iter().map(|m| not(Formula::Atom(m.clone(), v.clone()))),
        ))
    };
    let mut prefix = vec![(Quantifier::Exists, tau0.clone())];
    prefix.extend(s.prefix[..pos].iter().cloned());
    let mut before: Vec<Formula> = s.prefix[..pos].iter().map(|(_, v)| clean(v)).collect();
    if pos == 0 {
        let w = fresh_var("x1", &mut used);
        before.push(clean(&w));
        prefix.push((Quantifier::Exists, w));
    }
    prefix.extend(s.prefix[pos..].iter().cloned());
    let after = s.prefix[pos + 1..].iter().map(|(_, v)| clean(v));
    let mut letters: BTreeSet<Prop> = s.props();
    letters.extend(ms.iter().cloned());
    let differs = eventually(or_all(letters.iter().map(|a| {
        xor(
            Formula::Atom(a.clone(), pi.clone()),
            Formula::Atom(a.clone(), tau0.clone()),
        )
    })));
    let body = and_all(std::iter::once(rewrite(&s.matrix, &tau0)).chain(after));
    let matrix = and_all(
        ms.iter()
            .map(|m| eventually(Formula::Atom(m.clone(), tau0.clone())))
            .chain(before)
            .chain([implies(differs, body)]),
    );
    Sentence::new(prefix, matrix)
}

/// `t0 = {m0}{m1}…{md} ∅^ω` for the X-depth of `s`.
pub fn xelim_trace(s: &Sentence) -> LassoTrace {
    let d = max_next(&s.matrix);
    let stem = (0..=d).map(|k| valuation(&[marker(k).name()])).collect();
    LassoTrace::raw(stem, vec![valuation(&[])])
}

/// `T ∪ {t0}`.
pub fn xelim_model(t: &FiniteTraceModel, s: &Sentence) -> FiniteTraceModel {
    FiniteTraceModel::new(t.traces().cloned().chain([xelim_trace(s)])).expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::temporal_depth;
    use crate::semantics::eval_sentence;
    use crate::syntax::parse_sentence;

    #[test]
    fn rewrite_and_transport() {
        let s = parse_sentence("exists t. forall p. X X a[p]").unwrap();
        let o = eliminate_x(&s).unwrap();
        assert!(in_fragment(&o, Fragment::FG1));
        assert!(o.props().contains(&Prop::new("@m2")));
        assert_eq!(temporal_depth(&o.matrix), 1);
        let sat = FiniteTraceModel::new([LassoTrace::raw(
            vec![valuation(&[]), valuation(&[])],
            vec![valuation(&["a"])],
        )])
        .unwrap();
        let unsat = FiniteTraceModel::new([LassoTrace::constant(valuation(&[]))]).unwrap();
        for t in [&sat, &unsat] {
            assert_eq!(
                eval_sentence(&s, t).unwrap(),
                eval_sentence(&o, &xelim_model(t, &s)).unwrap()
            );
        }
    }

    #[test]
    fn marker_trace_is_not_a_witness() {
        let s = parse_sentence("forall p. exists t. G !a[t]").unwrap();
        let t = FiniteTraceModel::new([LassoTrace::constant(valuation(&["a"]))]).unwrap();
        assert!(!eval_sentence(&s, &t).unwrap());
        let o = eliminate_x(&s).unwrap();
        assert!(!eval_sentence(&o, &xelim_model(&t, &s)).unwrap());
        let only = FiniteTraceModel::new([xelim_trace(&s)]).unwrap();
        assert!(!eval_sentence(&o, &only).unwrap());
    }
}
