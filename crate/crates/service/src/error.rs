use minilang::LangError;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::session::SessionError;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown assignment {0}")]
    UnknownAssignment(String),
    #[error("unknown submission {0}")]
    UnknownSubmission(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("submission does not compile: {0}")]
    Lang(LangError),
    #[error("a summative session needs a proctor token")]
    ProctorTokenRequired,
    #[error("the proctor token was not accepted")]
    ProctorTokenRejected,
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("the session changed while the request was in flight")]
    Conflict,
    #[error("{0}")]
    Validation(String),
    #[error("stored data is inconsistent: {0}")]
    Corrupt(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

/// Wire form of an error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownAssignment(_) => "UNKNOWN_ASSIGNMENT",
            ServiceError::UnknownSubmission(_) => "UNKNOWN_SUBMISSION",
            ServiceError::UnknownSession(_) => "UNKNOWN_SESSION",
            ServiceError::Lang(LangError::Parse(_)) => "PARSE_ERROR",
            ServiceError::Lang(LangError::Semantic(_)) => "SEMANTIC_ERROR",
            ServiceError::ProctorTokenRequired => "PROCTOR_TOKEN_REQUIRED",
            ServiceError::ProctorTokenRejected => "PROCTOR_TOKEN_REJECTED",
            ServiceError::Session(e) => match e {
                SessionError::WrongState { .. } => "WRONG_STATE",
                SessionError::StaleQuestion { .. } => "STALE_QUESTION",
                SessionError::InvalidChoice(_) => "INVALID_CHOICE",
                SessionError::EmptyAnswer => "EMPTY_ANSWER",
                SessionError::SessionNotFinished => "SESSION_NOT_FINISHED",
                SessionError::Invalid(_) => "VALIDATION",
            },
            ServiceError::Conflict => "CONFLICT",
            ServiceError::Validation(_) => "VALIDATION",
            ServiceError::Corrupt(_) => "CORRUPT_DATA",
            ServiceError::Internal(_) => "INTERNAL",
        }
    }

    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownAssignment(_)
            | ServiceError::UnknownSubmission(_)
            | ServiceError::UnknownSession(_) => 404,
            ServiceError::Lang(_) => 422,
            ServiceError::ProctorTokenRequired | ServiceError::ProctorTokenRejected => 403,
            ServiceError::Session(e) => match e {
                SessionError::WrongState { .. }
                | SessionError::StaleQuestion { .. }
                | SessionError::SessionNotFinished => 409,
                SessionError::InvalidChoice(_) | SessionError::EmptyAnswer | SessionError::Invalid(_) => 400,
            },
            ServiceError::Conflict => 409,
            ServiceError::Validation(_) => 400,
            ServiceError::Corrupt(_) | ServiceError::Internal(_) => 500,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let detail = match self {
            ServiceError::Lang(LangError::Parse(p)) => json!({
                "line": p.line,
                "column": p.column,
                "found": p.found,
                "expected": p.expected,
            }),
            ServiceError::Lang(LangError::Semantic(s)) => json!({ "line": s.line, "kind": s.kind.to_string() }),
            ServiceError::Session(SessionError::WrongState { state }) => json!({ "state": state }),
            ServiceError::Session(SessionError::StaleQuestion { question_id }) => json!({ "question_id": question_id }),
            ServiceError::Session(SessionError::InvalidChoice(i)) => json!({ "choice_index": i }),
            _ => Value::Null,
        };
        ErrorBody { code: self.code(), message: self.to_string(), detail }
    }
}
