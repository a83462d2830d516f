use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;

use super::{search_props, Budget, Certificate, Outcome, Stats, Verdict};
use crate::error::{Error, Result};
use crate::formula::Sentence;
use crate::modelcheck::modelcheck_with;
use crate::semantics::{KripkeStructure, Valuation};

fn reachable_all(init: u32, succ: &[u32]) -> bool {
    let mut seen = init;
    let mut frontier = init;
    while frontier != 0 {
        let q = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let new = succ[q] & !seen;
        seen |= new;
        frontier |= new;
    }
    seen == (1u32 << succ.len()) - 1
}

fn bits(mask: u32) -> BTreeSet<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// Some structure with at most `k` states whose trace set models `s`.
/// States are labelled in non-decreasing order and every state must be
/// reachable; isomorphic duplicates may still be visited.
pub fn sat_bounded_kripke(s: &Sentence, k: usize, budget: &Budget) -> Result<Verdict> {
    let start = Instant::now();
    let props = search_props(s);
    let vals: Vec<Valuation> = (0..1u64 << props.len())
        .map(|b| {
            props
                .iter()
                .enumerate()
                .filter(|(i, _)| b >> i & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect();
    let count = AtomicU64::new(0);
    let blowup = AtomicBool::new(false);
    let done = |outcome| Verdict {
        outcome,
        stats: Stats {
            candidates: count.load(Ordering::Relaxed),
            elapsed: start.elapsed(),
        },
    };
    for n in 1..=k.min(16) {
        let subsets = (1u128 << n) - 1;
        let labelings = super::bounded::binom(vals.len() + n - 1, n);
        let total = labelings * subsets * subsets.saturating_pow(n as u32);
        if count.load(Ordering::Relaxed) as u128 + total > budget.candidates as u128 {
            return Ok(done(Outcome::Unknown(format!(
                "{total} structures with {n} states exceed the candidate budget"
            ))));
        }
        let labels: Vec<Vec<usize>> = (0..vals.len()).combinations_with_replacement(n).collect();
        let shapes: Vec<(u32, Vec<u32>)> = (1..=subsets as u32)
            .flat_map(|init| {
                (0..n)
                    .map(|_| 1..=subsets as u32)
                    .multi_cartesian_product()
                    .map(move |succ| (init, succ))
            })
            .filter(|(init, succ)| reachable_all(*init, succ))
            .collect();
        let jobs: Vec<(&Vec<usize>, &(u32, Vec<u32>))> = labels.iter().cartesian_product(&shapes).collect();
        let hit = jobs.par_iter().find_map_first(|(lab, (init, succ))| {
            count.fetch_add(1, Ordering::Relaxed);
            let ks = KripkeStructure::new(
                (0..n).map(|i| format!("s{i}")).collect(),
                lab.iter().map(|&i| vals[i].clone()).collect(),
                bits(*init),
                succ.iter().map(|&m| bits(m)).collect(),
            );
            let ks = match ks {
                Ok(ks) => ks,
                Err(e) => return Some(Err(e)),
            };
            match modelcheck_with(&ks, s, &budget.complement) {
                Ok((true, _)) => Some(Ok(ks)),
                Ok((false, _)) => None,
                Err(Error::ComplementBlowup { .. }) => {
                    blowup.store(true, Ordering::Relaxed);
                    None
                }
                Err(e) => Some(Err(e)),
            }
        });
        if let Some(ks) = hit {
            return Ok(done(Outcome::Sat(Certificate::Kripke(ks?))));
        }
    }
    if blowup.load(Ordering::Relaxed) {
        return Ok(done(Outcome::Unknown("complementation cap exceeded".into())));
    }
    Ok(done(Outcome::UnsatWithinBound(k)))
}
