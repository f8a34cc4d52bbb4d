//! Instructor and verifier agents: explanation scoring, hints, guardrails
//! over free text, prompt assembly and the external model adapter.

pub mod backend;
pub mod guard;
pub mod hints;
pub mod prompts;
pub mod verify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backend::{BackendDescriptor, BackendError, BackendKind};
pub use guard::{guard_turn, session_vocabulary, Classification, GuardConfig, GuardrailRuling};
pub use hints::{render_hint, HintLevel};
pub use prompts::{build_prompt_context, PromptTarget, PromptTemplates, Role};
pub use verify::{verify_explanation, Action, Thresholds, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Speaker {
    Student,
    Agent,
    System,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TurnKind {
    Question,
    Answer,
    Hint,
    Redirect,
    Verdict,
    Message,
}

/// One transcript entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub kind: TurnKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialogueError {
    #[error("the answer is empty")]
    EmptyAnswer,
    #[error("{role} prompt template lacks the {{{slot}}} placeholder")]
    MissingPlaceholder { role: Role, slot: &'static str },
}
