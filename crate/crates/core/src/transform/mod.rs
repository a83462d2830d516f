//! Equisatisfiability-preserving rewrites and the witness-model
//! constructions that transport models across them.

mod depth2;
mod expand;
mod merge;
mod skolem;
mod xelim;

use std::collections::BTreeSet;
use std::hash::Hasher;

pub use depth2::{reduce_depth2, witness_model_depth2};
pub(crate) use depth2::{bump, lcm};
pub use expand::{expand_quantifiers, DEFAULT_EXPAND_CAP};
pub use merge::{merge_model, merge_universals, mrg, unmerge};
pub use skolem::{critical_index, skolem_model, to_forall_exists};
pub use xelim::{eliminate_x, xelim_model, xelim_trace};

use crate::error::Result;
use crate::formula::{Formula, Sentence, Var};

/// `reduce_depth2`, then `to_forall_exists`, then `merge_universals`.
/// With `skip_if_shallow`, inputs of temporal depth at most two skip the
/// first pass.
pub fn normalize_forall2_exists(s: &Sentence, skip_if_shallow: bool) -> Result<Sentence> {
    let d2 = if skip_if_shallow && s.temporal_depth() <= 2 {
        s.clone()
    } else {
        reduce_depth2(s)
    };
    merge_universals(&to_forall_exists(&d2)?)
}

fn fnv(text: &str) -> u64 {
    let mut h = fnv::FnvHasher::default();
    h.write(text.as_bytes());
    h.finish()
}

fn used_vars(s: &Sentence) -> BTreeSet<Var> {
    let mut used: BTreeSet<Var> = s.vars().into_iter().collect();
    used.extend(s.matrix.all_vars());
    used
}

/// Distinct subformulas, children before parents.
fn subformulas(f: &Formula) -> Vec<Formula> {
    fn go(f: &Formula, seen: &mut BTreeSet<String>, out: &mut Vec<Formula>) {
        for c in f.children() {
            go(c, seen, out);
        }
        if seen.insert(f.to_string()) {
            out.push(f.clone());
        }
    }
    let mut out = Vec::new();
    go(f, &mut BTreeSet::new(), &mut out);
    out
}
