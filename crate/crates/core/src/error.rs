use thiserror::Error;

/// Errors raised across ingestion, parsing, evaluation and solving.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ingest error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Ingest { row: Option<usize>, message: String },

    #[error("unknown attribute `{0}`")]
    Schema(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },

    #[error("constraint `{constraint}`: {source}")]
    InConstraint {
        constraint: String,
        #[source]
        source: Box<Error>,
    },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("inference error: {0}")]
    Inference(String),

    #[error("oracle cap exceeded: relation has {rows} rows, cap is {cap}")]
    OracleCap { rows: usize, cap: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
