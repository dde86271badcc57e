use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of `{name}` has sort {got}, expected {expected}")]
    ArgumentSortMismatch {
        name: String,
        index: usize,
        expected: String,
        got: String,
    },
    #[error("cannot substitute a term of sort {got} for variable `{var}` of sort {expected}")]
    SortMismatch {
        var: String,
        expected: String,
        got: String,
    },
    #[error("variable `{0}` has no binding")]
    UnboundVariable(String),
    #[error("modal index `{0}` has no agent extension")]
    UndefinedModalIndex(String),
    #[error("product update with `{0}` leaves no worlds")]
    EmptyUpdate(String),
    #[error("`{action}` is not applicable at its event `{event}`")]
    NotApplicable { action: String, event: String },
    #[error("event `{event}` does not exist in `{action}`")]
    UnknownEvent { action: String, event: String },
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("substitution leaves parameter `{0}` unbound")]
    IncompleteSubstitution(String),
    #[error("formula contains no dynamic modality")]
    NoRedex,
    #[error("rewrite budget of {0} steps exhausted")]
    RewriteBudgetExhausted(usize),
    #[error("enumeration budget of {0} exceeded")]
    EnumerationBudgetExceeded(u64),
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Semantic(String),
    #[error("internal: {0}")]
    Internal(String),
}
