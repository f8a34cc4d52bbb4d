//! Prompt assembly for the external model backend.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DialogueError, Speaker, Turn};
use crate::facts::CodeFacts;
use crate::questions::{AtomKind, Question, ReferenceReason};

const INSTRUCTOR: &str = include_str!("../../prompts/instructor.txt");
const VERIFIER: &str = include_str!("../../prompts/verifier.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    Instructor,
    Verifier,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Instructor => "INSTRUCTOR",
            Role::Verifier => "VERIFIER",
        })
    }
}

impl Role {
    pub fn required_slots(self) -> &'static [&'static str] {
        match self {
            Role::Instructor => &["facts", "history", "target"],
            Role::Verifier => &["facts", "history", "target", "answer"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplates {
    pub instructor: String,
    pub verifier: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates { instructor: INSTRUCTOR.to_owned(), verifier: VERIFIER.to_owned() }
    }
}

impl PromptTemplates {
    /// Reads `instructor.txt` and `verifier.txt` from `dir`.
    pub fn load_dir(dir: &Path) -> std::io::Result<PromptTemplates> {
        Ok(PromptTemplates {
            instructor: std::fs::read_to_string(dir.join("instructor.txt"))?,
            verifier: std::fs::read_to_string(dir.join("verifier.txt"))?,
        })
    }

    pub fn get(&self, role: Role) -> &str {
        match role {
            Role::Instructor => &self.instructor,
            Role::Verifier => &self.verifier,
        }
    }

    pub fn validate(&self) -> Result<(), DialogueError> {
        for role in [Role::Instructor, Role::Verifier] {
            let text = self.get(role);
            if let Some(slot) = role.required_slots().iter().find(|s| !text.contains(&format!("{{{s}}}"))) {
                return Err(DialogueError::MissingPlaceholder { role, slot });
            }
        }
        Ok(())
    }
}

pub enum PromptTarget<'a> {
    Question(&'a Question),
    Reference { reference: &'a ReferenceReason, answer: &'a str },
}

fn render_history(history: &[Turn]) -> String {
    if history.is_empty() {
        return "(no turns yet)".to_owned();
    }
    history
        .iter()
        .map(|t| {
            let who = match t.speaker {
                Speaker::Student => "STUDENT",
                Speaker::Agent => "AGENT",
                Speaker::System => "SYSTEM",
            };
            format!("{who}: {}", t.text)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_question(q: &Question) -> String {
    let mut out = format!("Question {} ({})\n{}\nOptions:", q.question_id, q.kc, q.stem);
    for (i, o) in q.options.iter().enumerate() {
        out.push_str(&format!("\n  {}. {}", i + 1, o.text));
    }
    out
}

fn render_reference(r: &ReferenceReason) -> String {
    let mut out = format!("{}\nKey points:", r.canonical_explanation);
    for a in &r.atoms {
        let kind = match a.kind {
            AtomKind::Numeric => "value",
            AtomKind::Identifier => "identifier",
            AtomKind::Concept => "concept",
        };
        out.push_str(&format!("\n  - {kind} {} (weight {})", a.text_form, a.weight));
    }
    out
}

/// Replaces known `{slot}`s in one pass, so substituted text is never
/// scanned for further slots.
fn substitute(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let hit = values.iter().find(|(k, _)| after.starts_with(k) && after[k.len()..].starts_with('}'));
        match hit {
            Some((k, v)) => {
                out.push_str(v);
                rest = &after[k.len() + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn build_prompt_context(
    role: Role,
    templates: &PromptTemplates,
    facts: &CodeFacts,
    history: &[Turn],
    target: PromptTarget<'_>,
) -> Result<String, DialogueError> {
    let template = templates.get(role);
    if let Some(slot) = role.required_slots().iter().find(|s| !template.contains(&format!("{{{s}}}"))) {
        return Err(DialogueError::MissingPlaceholder { role, slot });
    }
    let facts_json = facts.to_json();
    let history_text = render_history(history);
    let (target_text, answer) = match target {
        PromptTarget::Question(q) => (render_question(q), ""),
        PromptTarget::Reference { reference, answer } => (render_reference(reference), answer),
    };
    Ok(substitute(
        template,
        &[("facts", &facts_json), ("history", &history_text), ("target", &target_text), ("answer", answer)],
    ))
}
