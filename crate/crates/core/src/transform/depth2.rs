use std::collections::BTreeSet;

use super::{fnv, subformulas, used_vars};
use crate::error::{Error, Result};
use crate::formula::{
    always, and, and_all, eventually, fresh_var, iff, next, not, or, until, xor, Formula, Prop,
    Quantifier, Sentence, Var,
};
use crate::semantics::{eval_sentence, CompiledQf, FiniteTraceModel, LassoTrace, Valuation};

fn marker(f: &Formula) -> Prop {
    Prop::new(&format!("@d{:016x}", fnv(&f.to_string())))
}

fn m(f: &Formula, tau: &Var) -> Formula {
    Formula::Atom(marker(f), tau.clone())
}

/// `overline(ψ')`: the marker of `ψ'` is glued to its top connective
/// applied to the markers of its children.
fn overline(f: &Formula, tau: &Var) -> Formula {
    use Formula as Fm;
    let mf = m(f, tau);
    let body = match f {
        Fm::True => return always(mf),
        Fm::False => return always(not(mf)),
        Fm::Atom(_, _) => f.clone(),
        Fm::Not(a) => not(m(a, tau)),
        Fm::And(a, b) => and(m(a, tau), m(b, tau)),
        Fm::Or(a, b) => or(m(a, tau), m(b, tau)),
        Fm::Implies(a, b) => crate::formula::implies(m(a, tau), m(b, tau)),
        Fm::Iff(a, b) => iff(m(a, tau), m(b, tau)),
        Fm::Xor(a, b) => xor(m(a, tau), m(b, tau)),
        Fm::Next(a) => next(m(a, tau)),
        Fm::Eventually(a) => eventually(m(a, tau)),
        Fm::Always(a) => always(m(a, tau)),
        Fm::Until(a, b) => until(m(a, tau), m(b, tau)),
        Fm::Exists(_, _) | Fm::Forall(_, _) => unreachable!("quantifier-free matrix"),
    };
    always(iff(mf, body))
}

/// `Q1π1…Qnπn ∃τ. m^ψ_τ ∧ ⋀ overline(ψ')` over the subformulas `ψ'` of the
/// matrix; temporal depth at most two.
pub fn reduce_depth2(s: &Sentence) -> Sentence {
    let tau = fresh_var("t", &mut used_vars(s));
    let subs = subformulas(&s.matrix);
    let matrix = and(
        m(&s.matrix, &tau),
        and_all(subs.iter().map(|f| overline(f, &tau))),
    );
    let mut prefix = s.prefix.clone();
    prefix.push((Quantifier::Exists, tau));
    Sentence::new(prefix, matrix).expect("closed by construction")
}

/// `{W(t1…tn) | ti ∈ T}`: copies of `t1` annotated with the truth values of
/// every subformula of the matrix under `πi ↦ ti`.
pub fn witness_model_depth2(t: &FiniteTraceModel, s: &Sentence) -> Result<FiniteTraceModel> {
    if !eval_sentence(s, t)? {
        return Err(Error::NotAModel);
    }
    let ts = t.to_vec();
    let c = CompiledQf::new(&s.matrix)?;
    let subs: Vec<(Prop, usize)> = subformulas(&s.matrix)
        .iter()
        .map(|f| (marker(f), c.node_of(f).expect("compiled subformula")))
        .collect();
    let vars = s.vars();
    let n = vars.len();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; n];
    loop {
        let tuple: Vec<&LassoTrace> = idx.iter().map(|&i| &ts[i]).collect();
        let args: Vec<&LassoTrace> = c
            .slots()
            .iter()
            .map(|v| tuple[vars.iter().position(|w| w == v).expect("bound")])
            .collect();
        let vec = c.vectors(&args)?;
        let base = tuple.first().copied().unwrap_or(&ts[0]);
        let stem = vec.stem.max(base.stem().len());
        let period = lcm(vec.period, base.lp().len());
        let at = |j: usize| -> Valuation {
            let mut v = base.value_at(j).clone();
            v.extend(
                subs.iter()
                    .filter(|(_, k)| vec.at(*k, j))
                    .map(|(p, _)| p.clone()),
            );
            v
        };
        out.insert(
            LassoTrace::raw(
                (0..stem).map(at).collect(),
                (stem..stem + period).map(at).collect(),
            )
            .canonical(),
        );
        if !bump(&mut idx, ts.len()) {
            break;
        }
    }
    let w = FiniteTraceModel::new(out)?;
    if !eval_sentence(&reduce_depth2(s), &w)? {
        return Err(Error::Invalid(
            "internal: depth-2 witness model failed verification".into(),
        ));
    }
    Ok(w)
}

/// Odometer increment; false once every tuple was visited.
pub(crate) fn bump(idx: &mut [usize], base: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < base {
            return true;
        }
        idx[i] = 0;
    }
    false
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    let g = crate::semantics::gcd(a as u128, b as u128) as usize;
    a / g * b
}
