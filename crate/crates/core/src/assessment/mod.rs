//! Knowledge tracking, question selection, functional tests and the fused
//! assessment report.

mod functional;
mod knowledge;
mod report;

pub use functional::{run_functional_tests, FunctionalResult, TestOutcome};
pub use knowledge::{select_next, HistoryEntry, KnowledgeState, Next};
pub use report::{
    dialogue_score, functional_score, fuse, unproductive_success, AssessmentReport, Mode, QuestionRecord,
};

use thiserror::Error;

use crate::kc::Kc;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssessmentError {
    #[error("knowledge component {0} is not tracked in this session")]
    UnknownKc(Kc),
}
