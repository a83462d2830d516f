//! Model checking of Kripke structures: one product-and-project step per
//! quantifier, innermost first, with complementation whenever the
//! automaton's polarity disagrees with the quantifier.

use crate::automata::{atoms_of, complement_with, ltl_to_nba, ComplementLimits};
use crate::error::{Error, Result};
use crate::formula::{not, Quantifier, Sentence};
use crate::semantics::{eval_qf, KripkeStructure, TraceAssignment};

/// Counters from one model-checking run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct McStats {
    pub complementations: usize,
    pub max_states: usize,
}

/// `T(K) ⊨ s`.
pub fn modelcheck(k: &KripkeStructure, s: &Sentence) -> Result<bool> {
    modelcheck_with(k, s, &ComplementLimits::default()).map(|(b, _)| b)
}

pub fn modelcheck_with(
    k: &KripkeStructure,
    s: &Sentence,
    lim: &ComplementLimits,
) -> Result<(bool, McStats)> {
    let mut stats = McStats::default();
    let Some((last, _)) = s.prefix.last() else {
        return Ok((eval_qf(&s.matrix, &TraceAssignment::new())?, stats));
    };
    // positive: the automaton accepts assignments satisfying the suffix;
    // negative: assignments violating it
    let mut positive = *last == Quantifier::Exists;
    let atoms = atoms_of(&s.matrix);
    let f = if positive {
        s.matrix.clone()
    } else {
        not(s.matrix.clone())
    };
    let mut a = ltl_to_nba(&f, &atoms)?;
    stats.max_states = a.num_states();
    for (i, (q, v)) in s.prefix.iter().enumerate().rev() {
        if (*q == Quantifier::Exists) != positive {
            a = complement_with(&a, lim).map_err(|e| match e {
                Error::ComplementBlowup { states, cap, .. } => Error::ComplementBlowup {
                    states,
                    cap,
                    position: Some(i),
                },
                e => e,
            })?;
            stats.complementations += 1;
            positive = !positive;
        }
        a = a.product_project(k, v)?;
        stats.max_states = stats.max_states.max(a.num_states());
    }
    Ok((positive != a.is_empty(), stats))
}
