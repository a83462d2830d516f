use std::collections::BTreeSet;

use super::depth2::{bump, lcm};
use super::used_vars;
use crate::error::{Error, Result};
use crate::formula::{
    always, and, and_all, fresh_var, iff, Formula, Prop, Quantifier, Sentence, Var,
};
use crate::semantics::{FiniteTraceModel, LassoTrace, Valuation};

fn pair(a: &Prop, i: usize) -> Prop {
    Prop::new(&format!("@{}.{}", a.name(), i))
}

fn split(p: &Prop) -> Option<(Prop, usize)> {
    let body = p.name().strip_prefix('@')?;
    let (a, i) = body.rsplit_once('.')?;
    Some((Prop::new(a), i.parse().ok()?))
}

/// Two universals over product propositions `(a,i)`: one merged trace
/// stands for an `n`-tuple, and `n²` existential shufflings keep the model
/// closed under recombining components. Identity when `n ≤ 2`.
pub fn merge_universals(s: &Sentence) -> Result<Sentence> {
    let kinds = s.kinds();
    let n = kinds
        .iter()
        .take_while(|q| **q == Quantifier::Forall)
        .count();
    if kinds[n..].contains(&Quantifier::Forall) {
        return Err(Error::Shape("merge_universals needs a ∀*∃* prefix".into()));
    }
    if n <= 2 {
        return Ok(s.clone());
    }
    let vars = s.vars();
    let mut used = used_vars(s);
    let pi = fresh_var("u", &mut used);
    let pi2 = fresh_var("v", &mut used);
    let ap = s.props();
    let mut taus = Vec::new();
    let mut psi1 = Vec::new();
    for i1 in 1..=n {
        for i2 in 1..=n {
            let tau = fresh_var(&format!("s{i1}_{i2}"), &mut used);
            for a in &ap {
                let at = |v: &Var, i: usize| Formula::Atom(pair(a, i), v.clone());
                let mut parts = vec![iff(at(&tau, i1), at(&pi2, i2))];
                parts.extend(
                    (1..=n)
                        .filter(|&j| j != i1)
                        .map(|j| iff(at(&tau, j), at(&pi, j))),
                );
                psi1.push(always(and_all(parts)));
            }
            taus.push(tau);
        }
    }
    let universals = &vars[..n];
    let psi2 = s
        .matrix
        .map_atoms(&mut |a, v| match universals.iter().position(|u| u == v) {
            Some(j) => Formula::Atom(pair(a, j + 1), pi.clone()),
            None => Formula::Atom(pair(a, 1), v.clone()),
        });
    let mut prefix = vec![(Quantifier::Forall, pi), (Quantifier::Forall, pi2)];
    prefix.extend(s.prefix[n..].iter().cloned());
    prefix.extend(taus.into_iter().map(|t| (Quantifier::Exists, t)));
    Sentence::new(prefix, and(and_all(psi1), psi2))
}

/// `mrg(t1…tn)(j) = ⋃ ti(j) × {i}`.
pub fn mrg(ts: &[&LassoTrace]) -> LassoTrace {
    let stem = ts.iter().map(|t| t.stem().len()).max().unwrap_or(0);
    let period = ts.iter().fold(1, |p, t| lcm(p, t.lp().len()));
    let at = |j: usize| -> Valuation {
        ts.iter()
            .enumerate()
            .flat_map(|(i, t)| t.value_at(j).iter().map(move |a| pair(a, i + 1)))
            .collect()
    };
    LassoTrace::raw(
        (0..stem).map(at).collect(),
        (stem..stem + period).map(at).collect(),
    )
    .canonical()
}

/// `{mrg(t1…tn) | ti ∈ T}`.
pub fn merge_model(t: &FiniteTraceModel, n: usize) -> FiniteTraceModel {
    let ts = t.to_vec();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; n];
    loop {
        let tuple: Vec<&LassoTrace> = idx.iter().map(|&i| &ts[i]).collect();
        out.insert(mrg(&tuple));
        if !bump(&mut idx, ts.len()) {
            break;
        }
    }
    FiniteTraceModel::new(out).expect("nonempty")
}

/// Projection of merged traces to their first component.
pub fn unmerge(t: &FiniteTraceModel) -> FiniteTraceModel {
    FiniteTraceModel::new(t.traces().map(|tr| {
        tr.map(|v| {
            v.iter()
                .filter_map(|p| split(p).filter(|(_, i)| *i == 1).map(|(a, _)| a))
                .collect()
        })
    }))
    .expect("nonempty")
}
