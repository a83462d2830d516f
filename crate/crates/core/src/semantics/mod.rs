//! Lasso traces, finite trace models, Kripke structures and exact evaluation.

mod eval;
mod kripke;
mod trace;

pub use eval::{
    eval_formula, eval_qf, eval_sentence, eval_sentence_with_cap, CompiledQf, Evaluator,
    TraceAssignment, Vectors,
};
pub use kripke::{kripke_lassos, KripkeStructure};
pub use trace::{
    align, gcd, valuation, FiniteTraceModel, LassoTrace, Valuation, DEFAULT_PERIOD_CAP,
};
