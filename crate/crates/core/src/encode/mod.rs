//! Reduction encoders and their reference models: PCP, Minsky machines and
//! star-free expressions.

mod minsky;
mod pcp;
mod starfree;

pub use minsky::{
    config_trace, counter_prop, encode_minsky, minsky_rank, minsky_run_model, minsky_step,
    MinskyMachine, Op, Rule,
};
pub use pcp::{binary, encode_pcp, pcp_solution_model, type_one, type_two, PcpInstance, PcpProps};
pub use starfree::{
    encode_starfree, word_structure, psi_e, starfree_sample, word_trace, StarFreeExpr,
};
