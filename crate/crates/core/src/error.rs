use thiserror::Error;

use crate::syntax::ParseError;

/// Structured failures shared by every module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// A quantifier occurs inside the scope of a temporal operator.
    #[error("quantifier over `{0}` occurs under a temporal operator")]
    QuantifierUnderTemporal(String),
    #[error("trace variable `{0}` is not bound")]
    NotClosed(String),
    #[error("substituting `{to}` for `{from}` would be captured by a binder")]
    Capture { from: String, to: String },
    #[error("trace variable `{0}` is quantified twice")]
    DuplicateVariable(String),
    #[error("quantifier inside sentence matrix")]
    QuantifiedMatrix,
    #[error("combined loop period {period} exceeds cap {cap}")]
    PeriodBlowup { period: u128, cap: u64 },
    #[error("formula size {size} exceeds cap {cap}")]
    SizeBlowup { size: usize, cap: usize },
    #[error("complementation of {states}-state automaton exceeds cap {cap}{}", .position.map(|p| format!(" (quantifier {p})")).unwrap_or_default())]
    ComplementBlowup {
        states: usize,
        cap: usize,
        position: Option<usize>,
    },
    #[error("too many atoms for the explicit alphabet: {0}")]
    AlphabetTooLarge(usize),
    #[error("unsupported shape: {0}")]
    Shape(String),
    #[error("model does not satisfy the sentence")]
    NotAModel,
    #[error("empty trace model")]
    EmptyModel,
    #[error("empty loop in trace `{0}`")]
    EmptyLoop(String),
    #[error("edge references unknown state `{0}`")]
    DanglingEdge(String),
    #[error("no initial state")]
    NoInitialState,
    #[error("state `{0}` has no successor")]
    NoSuccessor(String),
    #[error("empty word in pair {0}")]
    EmptyWordPair(usize),
    #[error("unknown opcode `{0}`")]
    UnknownOpcode(String),
    #[error("index word is not a solution")]
    NotASolution,
    #[error("{0}-sets are not totally ordered by inclusion")]
    NotTotallyOrdered(u8),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
