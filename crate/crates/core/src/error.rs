use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("{what} count {requested} exceeds the enumeration cap of {cap}")]
    Resource {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("arithmetic overflow in the chosen count type")]
    Overflow,

    #[error("negative result: {0}")]
    NegativeResult(String),

    #[error("inconsistent top value at D = {row}: closure gives {closure}, closed form gives {closed_form}")]
    Consistency {
        row: usize,
        closure: String,
        closed_form: String,
    },

    #[error("no schedule candidate matches the oracle ({0} candidates tried)")]
    NoMatch(usize),

    #[error("{} schedule candidates match the oracle: {}", .0.len(), .0.join(", "))]
    Ambiguous(Vec<String>),

    #[error("no mask family reproduces the oracle: {0}")]
    NoFit(String),

    #[error("mask search stopped after exhausting its budget of {0} nodes")]
    SearchBudget(u64),

    #[error("masks undefined for q = {0}; supply custom masks")]
    MasksUndefined(u32),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
