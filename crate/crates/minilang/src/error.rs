use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A syntax error with the position of the offending token and the set of
/// tokens that would have been accepted there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub found: String,
    pub expected: BTreeSet<String>,
}

impl ParseError {
    pub(crate) fn new(line: u32, column: u32, found: impl Into<String>) -> Self {
        Self { line, column, found: found.into(), expected: BTreeSet::new() }
    }

    pub(crate) fn with_expected<I, S>(mut self, expected: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.expected.extend(expected.into_iter().map(Into::into));
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        if self.expected.is_empty() {
            write!(f, "unexpected {}", self.found)
        } else {
            let expected: Vec<&str> = self.expected.iter().map(String::as_str).collect();
            write!(f, "expected one of {}, found {}", expected.join(", "), self.found)
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticErrorKind {
    #[error("undeclared identifier {0}")]
    UndeclaredIdentifier(String),
    #[error("undeclared function {0}")]
    UndeclaredFunction(String),
    #[error("duplicate declaration {0}")]
    DuplicateDeclaration(String),
    #[error("duplicate function {0}")]
    DuplicateFunction(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String },
    #[error("function {name} takes {expected} argument(s), {found} given")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("array size must be between 1 and {max}, got {size}")]
    BadArraySize { size: i64, max: usize },
    #[error("program must define exactly one function named main")]
    MissingMain,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct SemanticError {
    pub line: u32,
    pub kind: SemanticErrorKind,
}

/// Everything that can go wrong while turning source text into a [`Program`](crate::Program).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("semantic error at {0}")]
    Semantic(#[from] SemanticError),
}

impl LangError {
    pub fn line(&self) -> u32 {
        match self {
            LangError::Parse(e) => e.line,
            LangError::Semantic(e) => e.line,
        }
    }
}
