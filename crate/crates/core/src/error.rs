use crate::choice::ChoiceKind;
use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid market ({} violation(s)): {}", .0.len(), join(.0))]
    InvalidMarket(Vec<Violation>),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("hospital {hospital}: mechanism {kind} needs {needs} utilities")]
    IncompatibleMechanism { hospital: String, kind: ChoiceKind, needs: &'static str },
    #[error("hospital {0} has no mechanism assigned")]
    MissingMechanism(String),
    #[error("{what}: size {size} exceeds cap {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },
    #[error("deferred acceptance did not terminate within {0} rounds")]
    NonTermination(usize),
    #[error("engine does not support mechanism {0}")]
    UnsupportedKind(ChoiceKind),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unknown name {0:?}")]
    UnknownName(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn cap(what: &'static str, size: impl Into<u128>, cap: impl Into<u128>) -> Error {
        Error::CapExceeded { what, size: size.into(), cap: cap.into() }
    }
}
