//! HyperLTL satisfiability and model-checking workbench.
//!
//! Formulas and sentences live in [`formula`], concrete syntax in [`syntax`],
//! exact evaluation over lasso traces in [`semantics`]. The decision
//! procedures are in [`decide`] and [`modelcheck`]; [`transform`] holds the
//! equisatisfiability-preserving rewrites and [`encode`] the reduction
//! encoders with their reference models.

pub mod automata;
pub mod decide;
pub mod encode;
pub mod error;
pub mod formula;
pub mod modelcheck;
pub mod semantics;
pub mod syntax;
pub mod transform;

pub use error::{Error, Result};
