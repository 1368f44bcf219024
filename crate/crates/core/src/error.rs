use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("edge {0} does not exist")]
    InvalidEdge(usize),
    #[error("malformed decoration: {0}")]
    MalformedDecoration(String),
    #[error("unsupported kappa class: {0}")]
    UnsupportedKappa(String),
    #[error("invalid relation: {0}")]
    InvalidRelation(String),
    #[error("vertex {0} carries a nontrivial decoration")]
    VertexDecorated(usize),
    #[error("relation has {found} markings but the vertex has valence {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("monomial is already in normal shape")]
    AlreadyNormal,
    #[error("column key mismatch: {0}")]
    ColumnKeyMismatch(String),
    #[error("invalid locus: {0}")]
    InvalidLocus(String),
    #[error("denominator has zero constant term")]
    ZeroConstantTerm,
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
