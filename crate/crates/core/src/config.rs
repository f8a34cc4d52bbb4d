//! Per-assignment configuration, read from JSON.

use std::path::{Path, PathBuf};

use minilang::Inputs;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::Thresholds;
use crate::facts::InputDomains;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalTest {
    pub name: String,
    pub inputs: Inputs,
    /// Printed lines joined with newlines.
    pub expected_output: String,
}

/// Fusion weights for the functional and dialogue scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub functional: f64,
    pub dialogue: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { functional: 0.5, dialogue: 0.5 }
    }
}

impl Weights {
    /// Weights as exact fractions, so fused grades round without float drift.
    pub fn exact(&self) -> (Ratio<i64>, Ratio<i64>) {
        let r = |x: f64| Ratio::approximate_float(x).unwrap_or_else(|| Ratio::from_integer(0));
        (r(self.functional), r(self.dialogue))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MasteryConfig {
    pub alpha: f64,
    pub initial: f64,
}

impl Default for MasteryConfig {
    fn default() -> Self {
        MasteryConfig { alpha: 0.3, initial: 0.5 }
    }
}

fn default_input_sets() -> usize {
    3
}
fn default_step_budget() -> u64 {
    minilang::DEFAULT_STEP_BUDGET
}
fn default_question_budget() -> u32 {
    5
}
fn default_followup_cap() -> u32 {
    2
}
fn default_time_limit() -> u64 {
    30 * 60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentConfig {
    pub assignment_id: String,
    #[serde(default)]
    pub title: String,
    pub tests: Vec<FunctionalTest>,
    #[serde(default)]
    pub input_domains: InputDomains,
    #[serde(default = "default_input_sets")]
    pub input_sets: usize,
    /// Seed for sampling question inputs.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_step_budget")]
    pub step_budget: u64,
    #[serde(default = "default_question_budget")]
    pub question_budget: u32,
    #[serde(default = "default_followup_cap")]
    pub followup_cap: u32,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default)]
    pub mastery: MasteryConfig,
    #[serde(default = "default_time_limit")]
    pub summative_time_limit_secs: u64,
    /// Paths are relative to the directory holding the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guardrail_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid assignment JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid assignment {id}: {problem}")]
    Invalid { id: String, problem: String },
}

impl AssignmentConfig {
    /// A config with defaults everywhere except the id and tests.
    pub fn new(assignment_id: impl Into<String>, tests: Vec<FunctionalTest>) -> AssignmentConfig {
        AssignmentConfig {
            assignment_id: assignment_id.into(),
            title: String::new(),
            tests,
            input_domains: InputDomains::default(),
            input_sets: default_input_sets(),
            seed: 0,
            step_budget: default_step_budget(),
            question_budget: default_question_budget(),
            followup_cap: default_followup_cap(),
            thresholds: Thresholds::default(),
            weights: Weights::default(),
            mastery: MasteryConfig::default(),
            summative_time_limit_secs: default_time_limit(),
            guardrail_path: None,
            template_dir: None,
            prompt_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<AssignmentConfig, ConfigError> {
        let c: AssignmentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Loads a config and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<AssignmentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let mut c = AssignmentConfig::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut c.guardrail_path, &mut c.template_dir, &mut c.prompt_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad =
            |problem: &str| Err(ConfigError::Invalid { id: self.assignment_id.clone(), problem: problem.to_owned() });
        let w = self.weights;
        if self.tests.is_empty() {
            return bad("at least one functional test is required");
        }
        if w.functional < 0.0 || w.dialogue < 0.0 || (w.functional + w.dialogue - 1.0).abs() > 1e-9 {
            return bad("weights must be non-negative and sum to one");
        }
        let t = self.thresholds;
        if t.focused > t.pass || t.pass > 100 || t.max_attempts == 0 {
            return bad("thresholds need focused <= pass <= 100 and at least one attempt");
        }
        if self.question_budget == 0 || self.input_sets == 0 || self.step_budget == 0 {
            return bad("question budget, input set count and step budget must be positive");
        }
        let m = self.mastery;
        if !(m.alpha > 0.0 && m.alpha <= 1.0) || !(0.0..=1.0).contains(&m.initial) {
            return bad("mastery alpha must lie in (0, 1] and the initial value in [0, 1]");
        }
        let domains = std::iter::once(&self.input_domains.default).chain(self.input_domains.params.values());
        if domains.into_iter().any(|d| d.min > d.max) {
            return bad("input domain with min above max");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = AssignmentConfig::from_json(
            r#"{"assignment_id": "sum", "tests": [{"name": "t", "inputs": {"n": 3}, "expected_output": "3"}]}"#,
        )
        .unwrap();
        assert_eq!((c.question_budget, c.step_budget, c.input_sets, c.followup_cap), (5, 10_000, 3, 2));
        assert_eq!(c.thresholds, Thresholds::default());
        assert_eq!(c.weights.exact(), (Ratio::new(1, 2), Ratio::new(1, 2)));
        assert_eq!(c.summative_time_limit_secs, 1800);
        assert_eq!(c.input_domains.default.min, -8);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(AssignmentConfig::from_json(r#"{"assignment_id": "x", "tests": []}"#).is_err());
        let mut c = AssignmentConfig::new(
            "x",
            vec![FunctionalTest { name: "t".into(), inputs: Inputs::new(), expected_output: String::new() }],
        );
        c.validate().unwrap();
        c.weights.dialogue = 0.7;
        assert!(c.validate().is_err());
        c.weights = Weights { functional: 0.3, dialogue: 0.7 };
        c.validate().unwrap();
        assert_eq!(c.weights.exact(), (Ratio::new(3, 10), Ratio::new(7, 10)));
        c.question_budget = 0;
        assert!(c.validate().is_err());
    }
}
