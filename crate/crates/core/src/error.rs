use thiserror::Error;

use crate::ast::NodePath;

/// A query could not be parsed. `offset` is a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError {
            offset,
            message: message.into(),
        }
    }
}

/// Errors raised by path-addressed tree edits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("path {path} does not resolve")]
    Path { path: NodePath },
    #[error("cannot insert or delete at {path}: parent is not a collection")]
    Collection { path: NodePath },
    #[error("subtree at {path} does not match the delta's source subtree")]
    Mismatch { path: NodePath },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("query log contains no parseable queries")]
    EmptyLog,
    #[error("window size must be at least 1")]
    ZeroWindow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("hold-out split is empty")]
    EmptyHoldout,
    #[error("training split is empty")]
    EmptyTraining,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors raised while reading an interface document.
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unsupported document version {found} (expected {expected})")]
    SchemaVersion { found: u64, expected: u64 },
    #[error("invalid field `{field}`{}: {message}", widget.as_ref().map(|w| format!(" in widget {w}")).unwrap_or_default())]
    Validation {
        field: String,
        widget: Option<String>,
        message: String,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Errors raised while loading configuration files.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unsupported config version {0}")]
    Version(u64),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
