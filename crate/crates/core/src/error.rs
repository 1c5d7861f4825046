use std::path::PathBuf;

use thiserror::Error;

use crate::ast::Coord;

#[derive(Debug, Error, PartialEq)]
pub enum AstError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("value error at {path}: {message}")]
    Value { path: String, message: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{coord}: error: {message}")]
pub struct LexError {
    pub coord: Coord,
    pub message: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{coord}: error: expected {}, found {found}", expected.join(" or "))]
pub struct SyntaxError {
    pub coord: Coord,
    pub expected: Vec<String>,
    pub found: String,
}

/// Failure of the C front end.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

impl FrontendError {
    pub fn coord(&self) -> &Coord {
        match self {
            FrontendError::Lex(e) => &e.coord,
            FrontendError::Syntax(e) => &e.coord,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScopeError {
    #[error("{coord}: error: redeclaration of '{name}'")]
    DuplicateDecl { name: String, coord: Coord },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("terminal code band for {0} is exhausted")]
    Capacity(String),
    #[error("index {index} out of range for vocabulary of size {size}")]
    Range { index: usize, size: usize },
    #[error("{0} is not a valid composite code")]
    Decode(u64),
    #[error("non-terminal code {0} outside [1, 47]")]
    Nonterminal(u64),
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("dimension mismatch: {0}")]
    Dim(String),
    #[error("token {0} is not in the vocabulary")]
    UnknownToken(u64),
    #[error("dataset has no training pairs")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum RepairError {
    #[error("'{name}' is already declared in function '{function}'")]
    Conflict { name: String, function: String },
    #[error("no function named '{0}' in the translation unit")]
    UnknownFunction(String),
    #[error(transparent)]
    Ast(#[from] AstError),
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("fixture {id}: {message}")]
    Integrity { id: String, message: String },
    #[error("fixture {id}: bad JSON: {source}")]
    Json {
        id: String,
        source: serde_json::Error,
    },
}

/// Errors surfaced by the fix/train/eval drivers.
#[derive(Debug, Error)]
pub enum DriverError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("no truth annotation for corpus file {0}")]
    MissingTruth(String),
    #[error("{path}: bad JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl DriverError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DriverError::Io {
            path: path.into(),
            source,
        }
    }
}
