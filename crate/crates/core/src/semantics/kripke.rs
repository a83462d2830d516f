use std::collections::BTreeSet;

use super::trace::{FiniteTraceModel, LassoTrace, Valuation};
use crate::error::{Error, Result};

/// Finite labeled transition system with a set of initial states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KripkeStructure {
    names: Vec<String>,
    labels: Vec<Valuation>,
    initial: BTreeSet<usize>,
    succ: Vec<BTreeSet<usize>>,
}

impl KripkeStructure {
    /// Validates a nonempty initial set and successor totality.
    pub fn new(
        names: Vec<String>,
        labels: Vec<Valuation>,
        initial: BTreeSet<usize>,
        succ: Vec<BTreeSet<usize>>,
    ) -> Result<KripkeStructure> {
        assert_eq!(names.len(), labels.len());
        assert_eq!(names.len(), succ.len());
        if initial.is_empty() {
            return Err(Error::NoInitialState);
        }
        let n = names.len();
        if let Some(&bad) = initial.iter().find(|&&i| i >= n) {
            return Err(Error::DanglingEdge(bad.to_string()));
        }
        for (i, s) in succ.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::NoSuccessor(names[i].clone()));
            }
            if let Some(&bad) = s.iter().find(|&&j| j >= n) {
                return Err(Error::DanglingEdge(bad.to_string()));
            }
        }
        Ok(KripkeStructure {
            names,
            labels,
            initial,
            succ,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn label(&self, q: usize) -> &Valuation {
        &self.labels[q]
    }

    pub fn initial(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn succ(&self, q: usize) -> &BTreeSet<usize> {
        &self.succ[q]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Is `states` (stem then loop) a run of this structure?
    pub fn is_run(&self, stem: &[usize], lp: &[usize]) -> bool {
        let seq: Vec<usize> = stem.iter().chain(lp).copied().collect();
        if seq.is_empty() || lp.is_empty() || !self.initial.contains(&seq[0]) {
            return false;
        }
        seq.windows(2).all(|w| self.succ[w[0]].contains(&w[1]))
            && self.succ[lp[lp.len() - 1]].contains(&lp[0])
    }
}

/// All lasso traces of runs `q_0..q_{s-1} (q_s..q_{s+p-1})^ω` with
/// `s ≤ stem_bound` and `1 ≤ p ≤ loop_bound`, canonicalized.
pub fn kripke_lassos(
    k: &KripkeStructure,
    stem_bound: usize,
    loop_bound: usize,
) -> FiniteTraceModel {
    let mut out: BTreeSet<LassoTrace> = BTreeSet::new();
    let mut path = Vec::new();
    for &q in k.initial() {
        path.push(q);
        extend(k, &mut path, stem_bound, loop_bound, &mut out);
        path.pop();
    }
    FiniteTraceModel::new(out).expect("structure has an initial state with a loop")
}

fn extend(
    k: &KripkeStructure,
    path: &mut Vec<usize>,
    stem_bound: usize,
    loop_bound: usize,
    out: &mut BTreeSet<LassoTrace>,
) {
    // try every split of path into stem + loop
    let n = path.len();
    for s in n.saturating_sub(loop_bound)..n {
        if s > stem_bound {
            continue;
        }
        let last = path[n - 1];
        if k.succ(last).contains(&path[s]) {
            let lab = |q: &usize| k.label(*q).clone();
            let t = LassoTrace::raw(
                path[..s].iter().map(lab).collect(),
                path[s..].iter().map(lab).collect(),
            );
            out.insert(t.canonical());
        }
    }
    if n < stem_bound + loop_bound {
        let last = path[n - 1];
        for &q in k.succ(last) {
            path.push(q);
            extend(k, path, stem_bound, loop_bound, out);
            path.pop();
        }
    }
}
