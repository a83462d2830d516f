use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;

use super::{search_props, Budget, Certificate, Outcome, Stats, Verdict};
use crate::automata::{ltl_sat_capped, unzip, zip_exists};
use crate::error::{Error, Result};
use crate::formula::{classify_prefix, Prop, Quantifier, Sentence};
use crate::semantics::{eval_sentence_with_cap, CompiledQf, FiniteTraceModel, LassoTrace, Valuation};
use crate::transform::expand_quantifiers;

fn verdict(outcome: Outcome, candidates: u64, start: Instant) -> Verdict {
    Verdict {
        outcome,
        stats: Stats {
            candidates,
            elapsed: start.elapsed(),
        },
    }
}

fn verified(s: &Sentence, t: FiniteTraceModel, budget: &Budget) -> Result<Certificate> {
    if !eval_sentence_with_cap(s, &t, budget.period_cap)? {
        return Err(Error::Invalid("internal: candidate model failed verification".into()));
    }
    Ok(Certificate::Traces(t))
}

/// Model with at most `k` traces, through quantifier expansion and the LTL
/// backend; `UnsatWithinBound` is definitive for `k`.
pub fn sat_bounded_traces(s: &Sentence, k: usize, budget: &Budget) -> Result<Verdict> {
    let start = Instant::now();
    let e = expand_quantifiers(s, k, budget.expand_nodes)?;
    let z = zip_exists(&e)?;
    let Some(t) = ltl_sat_capped(&z, budget.tableau_states)? else {
        return Ok(verdict(Outcome::UnsatWithinBound(k), 1, start));
    };
    let model = FiniteTraceModel::new(unzip(&e, &t).into_iter().map(|(_, t)| t))?;
    let cert = verified(s, model, budget)?;
    Ok(verdict(Outcome::Sat(cert), 1, start))
}

/// Definitive answer for `∃*`, `∀*` and `∃*∀*` prefixes: a model exists iff
/// one with `max(1, #∃)` traces does.
pub fn decide_complete(s: &Sentence, budget: &Budget) -> Result<Verdict> {
    if !classify_prefix(s).is_exists_forall() {
        return Err(Error::Shape(format!(
            "decide_complete needs an ∃*∀* prefix, got {}",
            classify_prefix(s)
        )));
    }
    let k = s.count(Quantifier::Exists).max(1);
    let mut v = sat_bounded_traces(s, k, budget)?;
    if let Outcome::UnsatWithinBound(_) = v.outcome {
        v.outcome = Outcome::Unsat;
    }
    Ok(v)
}

/// Every canonical lasso `x y^ω` with `|x| + |y| ≤ k` over `props`, sorted.
pub fn lassos_up_to(props: &[Prop], k: usize) -> Vec<LassoTrace> {
    let vals: Vec<Valuation> = (0..1u64 << props.len())
        .map(|bits| {
            props
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    for len in 1..=k {
        for word in (0..len).map(|_| vals.iter()).multi_cartesian_product() {
            for split in 0..len {
                let stem = word[..split].iter().map(|v| (*v).clone()).collect();
                let lp = word[split..].iter().map(|v| (*v).clone()).collect();
                out.insert(LassoTrace::raw(stem, lp).canonical());
            }
        }
    }
    out.into_iter().collect()
}

enum Search {
    Found(FiniteTraceModel),
    Exhausted,
    Budget,
}

/// Some nonempty set of lassos with `|x| + |y| ≤ k` that models `s`.
pub fn sat_bounded_periodic(s: &Sentence, k: usize, budget: &Budget) -> Result<Verdict> {
    let start = Instant::now();
    let props = search_props(s);
    let approx = (1u128 << props.len().min(64)).saturating_pow(k as u32).saturating_mul(k as u128);
    if approx > budget.universe as u128 {
        return Ok(verdict(
            Outcome::Unknown(format!("lasso universe of about {approx} traces exceeds {}", budget.universe)),
            0,
            start,
        ));
    }
    let u = lassos_up_to(&props, k);
    let count = AtomicU64::new(0);
    let pat = classify_prefix(s);
    let res = if pat.is_exists_forall() {
        subsets(s, &u, s.count(Quantifier::Exists).max(1), budget, &count)?
    } else if pat.is_exists_forall_exists() {
        gfp_search(s, &u, budget, &count)?
    } else {
        subsets(s, &u, u.len(), budget, &count)?
    };
    let n = count.load(Ordering::Relaxed);
    Ok(match res {
        Search::Found(t) => verdict(Outcome::Sat(verified(s, t, budget)?), n, start),
        Search::Exhausted => verdict(Outcome::UnsatWithinBound(k), n, start),
        Search::Budget => verdict(
            Outcome::Unknown(format!("candidate budget {} exhausted", budget.candidates)),
            n,
            start,
        ),
    })
}

pub(super) fn binom(n: usize, r: usize) -> u128 {
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Subsets of `u` by increasing cardinality up to `max`.
fn subsets(s: &Sentence, u: &[LassoTrace], max: usize, budget: &Budget, count: &AtomicU64) -> Result<Search> {
    for r in 1..=max.min(u.len()) {
        if count.load(Ordering::Relaxed) as u128 + binom(u.len(), r) > budget.candidates as u128 {
            return Ok(Search::Budget);
        }
        let combos: Vec<Vec<usize>> = (0..u.len()).combinations(r).collect();
        let hit = combos.par_iter().find_map_first(|c| {
            count.fetch_add(1, Ordering::Relaxed);
            let t = FiniteTraceModel::new(c.iter().map(|&i| u[i].clone())).expect("nonempty");
            match eval_sentence_with_cap(s, &t, budget.period_cap) {
                Ok(true) => Some(Ok(t)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        });
        if let Some(t) = hit {
            return Ok(Search::Found(t?));
        }
    }
    Ok(Search::Exhausted)
}

/// `∃^n ∀ ∃^n'`: for each leading tuple, the largest subset of `u` in which
/// every trace has witnesses is a greatest fixpoint; a model exists iff it
/// contains the leading tuple.
fn gfp_search(s: &Sentence, u: &[LassoTrace], budget: &Budget, count: &AtomicU64) -> Result<Search> {
    let kinds = s.kinds();
    let n = kinds.iter().position(|q| *q == Quantifier::Forall).expect("one universal");
    let n2 = kinds.len() - n - 1;
    let m = u.len();
    let work = (m as u128).saturating_pow((n + 1 + n2) as u32);
    if work > budget.candidates as u128 {
        return Ok(Search::Budget);
    }
    let c = CompiledQf::new(&s.matrix)?.with_cap(budget.period_cap);
    let vars = s.vars();
    let slot_pos: Vec<usize> = c
        .slots()
        .iter()
        .map(|v| vars.iter().position(|w| w == v).expect("bound"))
        .collect();
    let leads = m.pow(n as u32);
    let decode = |mut code: usize, len: usize| -> Vec<usize> {
        let mut out = vec![0; len];
        for x in out.iter_mut().rev() {
            *x = code % m;
            code /= m;
        }
        out
    };
    let hit = (0..leads).into_par_iter().find_map_first(|code| {
        let lead = decode(code, n);
        let run = || -> Result<Option<FiniteTraceModel>> {
            let mut wit: Vec<Vec<Vec<usize>>> = Vec::with_capacity(m);
            let mut full = lead.clone();
            full.push(0);
            full.extend(std::iter::repeat(0).take(n2));
            for p in 0..m {
                full[n] = p;
                let mut ws = Vec::new();
                for tc in 0..m.pow(n2 as u32) {
                    let tau = decode(tc, n2);
                    full[n + 1..].copy_from_slice(&tau);
                    let args: Vec<&LassoTrace> = slot_pos.iter().map(|&i| &u[full[i]]).collect();
                    if c.eval(&args)? {
                        ws.push(tau);
                    }
                }
                count.fetch_add(m.pow(n2 as u32) as u64, Ordering::Relaxed);
                wit.push(ws);
            }
            let mut alive = vec![true; m];
            loop {
                let mut changed = false;
                for p in 0..m {
                    if alive[p] && !wit[p].iter().any(|w| w.iter().all(|&x| alive[x])) {
                        alive[p] = false;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            if !lead.iter().all(|&i| alive[i]) || !alive.iter().any(|&a| a) {
                return Ok(None);
            }
            let t = FiniteTraceModel::new((0..m).filter(|&i| alive[i]).map(|i| u[i].clone()))?;
            Ok(Some(t))
        };
        run().transpose()
    });
    match hit {
        Some(t) => Ok(Search::Found(t?)),
        None => Ok(Search::Exhausted),
    }
}
