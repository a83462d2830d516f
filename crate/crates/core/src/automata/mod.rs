//! LTL backend: tableau translation to Büchi automata, emptiness,
//! complementation, and the zipping of existential sentences into LTL.

mod complement;
mod ltl;
mod nba;

use std::collections::BTreeSet;

pub use complement::{complement_nba, complement_with, ComplementLimits};
pub use ltl::{ltl_sat_word, ltl_to_nba, DEFAULT_TABLEAU_CAP};
pub use nba::{Cube, Edge, LassoWord, Letter, Nba};

use crate::error::{Error, Result};
use crate::formula::{Formula, Prop, Quantifier, Sentence, Var};
use crate::semantics::{eval_qf, LassoTrace, TraceAssignment};

/// The single variable of zipped formulas.
pub const ZIP_VAR: &str = "z";

/// Relabels `a[π]` as `a@π[z]` for an all-existential sentence.
pub fn zip_exists(s: &Sentence) -> Result<Formula> {
    if s.prefix.iter().any(|(q, _)| *q == Quantifier::Forall) {
        return Err(Error::Shape("zip needs an existential prefix".into()));
    }
    let z = Var::new(ZIP_VAR);
    Ok(s.matrix.map_atoms(&mut |p, v| {
        Formula::Atom(Prop::new(&format!("{}@{}", p.name(), v.name())), z.clone())
    }))
}

/// Splits a zipped trace back into one trace per variable of `s`.
pub fn unzip(s: &Sentence, t: &LassoTrace) -> Vec<(Var, LassoTrace)> {
    s.vars()
        .into_iter()
        .map(|v| {
            let suffix = format!("@{}", v.name());
            let proj = t.map(|val| {
                val.iter()
                    .filter_map(|p| p.name().strip_suffix(&suffix).map(Prop::new))
                    .collect()
            });
            (v, proj.canonical())
        })
        .collect()
}

/// A lasso satisfying a quantifier-free formula with at most one free
/// variable, verified by `eval_qf`.
pub fn ltl_sat(f: &Formula) -> Result<Option<LassoTrace>> {
    ltl_sat_capped(f, DEFAULT_TABLEAU_CAP)
}

pub fn ltl_sat_capped(f: &Formula, cap: usize) -> Result<Option<LassoTrace>> {
    let vars = f.free_vars();
    if vars.len() > 1 || f.has_quantifier() {
        return Err(Error::Shape(
            "ltl_sat takes a quantifier-free single-trace formula".into(),
        ));
    }
    let Some((atoms, w)) = ltl_sat_word(f, cap)? else {
        return Ok(None);
    };
    let t = match w.unzip(&atoms).into_iter().next() {
        Some((_, t)) => t,
        None => LassoTrace::raw(Vec::new(), vec![Default::default()]),
    };
    let mut pi = TraceAssignment::new();
    if let Some(v) = vars.iter().next() {
        pi.insert(v.clone(), &t);
    }
    if !eval_qf(f, &pi)? {
        return Err(Error::Invalid(
            "internal: LTL model failed verification".into(),
        ));
    }
    Ok(Some(t))
}

/// Atoms of `f` in sorted order.
pub fn atoms_of(f: &Formula) -> Vec<(Prop, Var)> {
    f.atoms()
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}
