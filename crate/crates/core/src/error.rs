use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("substitution is circular at variable {var}")]
pub struct CircularSubstitution {
    pub var: String,
}

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Circular(#[from] CircularSubstitution),

    #[error("parse error at {span}: {message}")]
    Parse { span: Span, message: String },

    #[error("symbol `{name}` used with arity {first_arity} at {first} and arity {second_arity} at {second}")]
    ArityConflict {
        name: String,
        first: Span,
        first_arity: usize,
        second: Span,
        second_arity: usize,
    },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
