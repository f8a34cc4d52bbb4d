//! Turning source text into an analyzed, functionally tested submission.

use std::path::Path;

use minilang::parse;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use socratic_core::assessment::{run_functional_tests, FunctionalResult};
use socratic_core::config::AssignmentConfig;
use socratic_core::dialogue::{GuardConfig, PromptTemplates};
use socratic_core::facts::{analyze, sample_inputs, Analysis, CodeFacts};
use socratic_core::questions::Catalog;

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub submission_id: String,
    pub assignment_id: String,
    pub source: String,
    pub facts: CodeFacts,
    pub functional: FunctionalResult,
    pub received_at: u64,
    /// The assignment as it stood when the code arrived.
    pub config: AssignmentConfig,
}

/// Template catalog, guardrail lists and prompts for one assignment.
#[derive(Debug, Clone)]
pub struct Assets {
    pub catalog: Catalog,
    pub guard: GuardConfig,
    pub prompts: PromptTemplates,
}

impl Assets {
    pub fn for_config(c: &AssignmentConfig) -> Result<Assets, ServiceError> {
        let internal = |what: &str, e: &dyn std::fmt::Display| ServiceError::Internal(format!("{what}: {e}"));
        let catalog = match &c.template_dir {
            Some(d) => Catalog::load_dir(d).map_err(|e| internal("templates", &e))?,
            None => Catalog::builtin(),
        };
        let guard = match &c.guardrail_path {
            Some(p) => GuardConfig::load(p).map_err(|e| internal("guardrails", &e))?,
            None => GuardConfig::builtin(),
        };
        let prompts = match &c.prompt_dir {
            Some(d) => load_prompts(d)?,
            None => PromptTemplates::default(),
        };
        Ok(Assets { catalog, guard, prompts })
    }
}

fn load_prompts(dir: &Path) -> Result<PromptTemplates, ServiceError> {
    let p = PromptTemplates::load_dir(dir).map_err(|e| ServiceError::Internal(format!("prompts: {e}")))?;
    p.validate().map_err(|e| ServiceError::Internal(format!("prompts: {e}")))?;
    Ok(p)
}

/// Content address of a submission.
pub fn submission_id(assignment_id: &str, source: &str) -> String {
    let mut h = Sha256::new();
    h.update(assignment_id.as_bytes());
    h.update([0u8]);
    h.update(source.as_bytes());
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses, traces on the assignment's sampled inputs and runs the tests.
pub fn analyze_source(c: &AssignmentConfig, source: &str) -> Result<(Analysis, FunctionalResult), ServiceError> {
    let program = parse(source).map_err(ServiceError::Lang)?;
    let inputs = sample_inputs(&program, c.seed, c.input_sets, &c.input_domains);
    let analysis = analyze(&program, &inputs, c.step_budget).map_err(|e| ServiceError::Validation(e.to_string()))?;
    let functional = run_functional_tests(&program, &c.tests, c.step_budget);
    Ok((analysis, functional))
}

pub fn create(c: &AssignmentConfig, source: &str, received_at: u64) -> Result<(Submission, Analysis), ServiceError> {
    let (analysis, functional) = analyze_source(c, source)?;
    let sub = Submission {
        submission_id: submission_id(&c.assignment_id, source),
        assignment_id: c.assignment_id.clone(),
        source: source.to_owned(),
        facts: analysis.facts.clone(),
        functional,
        received_at,
        config: c.clone(),
    };
    Ok((sub, analysis))
}

/// Rebuilds the analysis of a stored submission and checks that it still
/// matches what was recorded.
pub fn restore(sub: &Submission) -> Result<Analysis, ServiceError> {
    let (analysis, functional) = analyze_source(&sub.config, &sub.source).map_err(|e| match e {
        ServiceError::Lang(e) => ServiceError::Corrupt(format!("stored source no longer compiles: {e}")),
        other => other,
    })?;
    if analysis.facts != sub.facts || functional != sub.functional {
        return Err(ServiceError::Corrupt(format!("submission {} does not reproduce", sub.submission_id)));
    }
    Ok(analysis)
}
