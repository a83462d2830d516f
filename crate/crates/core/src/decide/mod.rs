//! Satisfiability: bounded-cardinality, bounded-periodic and bounded-Kripke
//! search, the complete decider for `∃*∀*`, and the `∃*∀∃*` decider for
//! temporal depth one.

mod bounded;
mod fragment;
mod kripke;

use std::collections::BTreeSet;
use std::time::Duration;

pub use bounded::{decide_complete, lassos_up_to, sat_bounded_periodic, sat_bounded_traces};
pub use fragment::{fragment_witness_chain, sat_fragment, ChainStep, FragmentCertificate, WitnessChain};
pub use kripke::sat_bounded_kripke;

use crate::automata::{ComplementLimits, DEFAULT_TABLEAU_CAP};
use crate::formula::{Prop, Sentence};
use crate::semantics::{FiniteTraceModel, KripkeStructure, DEFAULT_PERIOD_CAP};
use crate::transform::DEFAULT_EXPAND_CAP;

/// Resource limits shared by the deciders.
#[derive(Clone, Debug)]
pub struct Budget {
    /// Largest combined loop period during evaluation.
    pub period_cap: u64,
    /// Tableau state cap of the LTL backend.
    pub tableau_states: usize,
    /// Node cap for quantifier expansion.
    pub expand_nodes: usize,
    /// Candidate models or structures examined before giving up.
    pub candidates: u64,
    /// Largest lasso universe for periodic search.
    pub universe: usize,
    pub complement: ComplementLimits,
    /// Abstract members enumerated by the fragment decider.
    pub fragment_members: u64,
    /// Witness-chain depth used to re-verify fragment certificates.
    pub chain_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            period_cap: DEFAULT_PERIOD_CAP,
            tableau_states: DEFAULT_TABLEAU_CAP,
            expand_nodes: DEFAULT_EXPAND_CAP,
            candidates: 2_000_000,
            universe: 4096,
            complement: ComplementLimits::default(),
            fragment_members: 4_000_000,
            chain_depth: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Certificate {
    Traces(FiniteTraceModel),
    Kripke(KripkeStructure),
    Fragment(Box<FragmentCertificate>),
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Sat(Certificate),
    Unsat,
    /// No model within the bound.
    UnsatWithinBound(usize),
    Unknown(String),
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub candidates: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: Stats,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self.outcome, Outcome::Sat(_))
    }

    /// `Unsat` or `UnsatWithinBound`.
    pub fn is_unsat(&self) -> bool {
        matches!(self.outcome, Outcome::Unsat | Outcome::UnsatWithinBound(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self.outcome, Outcome::Unknown(_))
    }

    pub fn label(&self) -> &'static str {
        match self.outcome {
            Outcome::Sat(_) => "SAT",
            Outcome::Unsat => "UNSAT",
            Outcome::UnsatWithinBound(_) => "UNSAT_WITHIN_BOUND",
            Outcome::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.outcome {
            Outcome::Sat(c) => Some(c),
            _ => None,
        }
    }

    /// 0 SAT, 1 UNSAT (within bound), 2 UNKNOWN.
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            Outcome::Sat(_) => 0,
            Outcome::Unsat | Outcome::UnsatWithinBound(_) => 1,
            Outcome::Unknown(_) => 2,
        }
    }
}

/// Propositions the search ranges over.
fn search_props(s: &Sentence) -> Vec<Prop> {
    let ps: BTreeSet<Prop> = s.props();
    ps.into_iter().collect()
}
